#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "pathway/cluster.hpp"
#include "pathway/detect.hpp"
#include "pathway/grid.hpp"
#include "pathway/partition.hpp"
#include "pathway/rules.hpp"
#include "pathway/sequence.hpp"

namespace pathway {

struct RunConfig {
    std::uint64_t seed = 1;
    std::filesystem::path out_dir = "out";
    std::optional<ScenarioConfig> scenario;
    std::vector<std::filesystem::path> forced_dirs;
    std::vector<std::filesystem::path> baseline_dirs;
    std::vector<std::string> variables;  // tuple order
    std::size_t partition_size = 3;
    std::map<std::string, SignatureSpec> signature;  // per variable
    std::map<std::string, std::size_t> k;            // per variable
    std::vector<std::size_t> k_range;                // expanded sweep values
    std::vector<std::size_t> p_range;
    std::vector<std::pair<std::string, SignatureSpec>> spec_set;  // named sweep specs
    double alpha = 0.05;
    std::size_t n_min = 1;
    std::size_t n_max = 4;
    std::filesystem::path rules_path;
    std::size_t trim_poles_rows = 0;
    MissingPolicy missing_policy = MissingPolicy::exclude;
    int threads = 1;

    const SignatureSpec& spec_for(const std::string& variable) const;
};

// Loads the JSON run config, applies --set overrides (dotted keys) and the
// PATHWAY_MINER_SEED env var. Throws ConfigError.
RunConfig load_config(const std::filesystem::path& path,
                      const std::vector<std::pair<std::string, std::string>>& overrides,
                      const std::optional<std::filesystem::path>& out_override,
                      int threads);

// Ensemble access for pipeline stages: scenario mode reads the directories
// written by cmd_gen under <out>/data; dataset mode reads the configured
// directory lists. Pole trimming is applied here.
EnsemblePair load_ensemble(const RunConfig& cfg);

struct ClusterArtifacts {
    std::string variable;
    std::size_t k = 0;
    std::size_t dim = 0;
    std::vector<double> centroids;
    std::vector<int> permutation;
    std::uint64_t seed = 0;
    double inertia = 0.0;
    // labels[arm][member], arm 0 = baseline, 1 = forced
    std::vector<std::vector<LabelField>> labels;
    std::size_t nt = 0;
    std::size_t npart = 0;
};

void save_cluster_artifacts(const ClusterArtifacts& art, const std::filesystem::path& dir);
ClusterArtifacts load_cluster_artifacts(const std::filesystem::path& dir,
                                        const std::string& variable);

void cmd_gen(const RunConfig& cfg);
void cmd_stability(const RunConfig& cfg);
void cmd_cluster(const RunConfig& cfg);
void cmd_detect(const RunConfig& cfg);
void cmd_mine(const RunConfig& cfg);
void cmd_assert(const RunConfig& cfg);
void cmd_report(const RunConfig& cfg);

}  // namespace pathway
