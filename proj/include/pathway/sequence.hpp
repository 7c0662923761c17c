#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <vector>

#include "pathway/cluster.hpp"

namespace pathway {

// Joint cluster assignment across variables, e.g. (3,1,4).
using Symbol = std::vector<std::int32_t>;
// Ordered sequence of distinct symbols (an evolution pattern).
using Pattern = std::vector<Symbol>;

// Per-(t, partition) cluster tuples; a tuple is invalid if any component is.
struct TupleLabels {
    std::size_t nt = 0;
    std::size_t npart = 0;
    std::size_t arity = 0;
    std::vector<std::int32_t> comps;  // [t][partition][v], -1 marks invalid

    bool is_valid(std::size_t t, std::size_t part) const {
        const std::int32_t* p = comps.data() + (t * npart + part) * arity;
        for (std::size_t v = 0; v < arity; ++v)
            if (p[v] < 0) return false;
        return true;
    }
    Symbol symbol(std::size_t t, std::size_t part) const {
        const std::int32_t* p = comps.data() + (t * npart + part) * arity;
        return Symbol(p, p + arity);
    }
};

struct Run {
    Symbol symbol;
    std::size_t t_start = 0;
    std::size_t t_end = 0;  // inclusive
    std::size_t length() const { return t_end - t_start + 1; }
};

// Per partition: runs grouped into segments. Invalid timesteps split a
// partition's sequence; runs never bridge an invalid gap.
struct RunSequence {
    std::size_t npart = 0;
    std::vector<std::vector<std::vector<Run>>> segments;  // [partition][segment][run]
};

struct Occurrence {
    std::uint8_t arm = 0;  // 0 = baseline, 1 = forced
    std::uint16_t member = 0;
    std::uint32_t partition = 0;
    std::uint32_t t_start = 0;
    std::uint32_t t_end = 0;
    std::uint32_t covered = 0;  // sum of run lengths over the occurrence's span
};

struct PatternData {
    std::vector<Occurrence> occurrences;
    std::uint64_t instances = 0;
    std::uint64_t partition_timesteps[2] = {0, 0};  // by arm
};

struct PatternIndex {
    std::map<Pattern, PatternData> patterns;  // lexicographic symbol order

    std::uint64_t total_partition_timesteps(int arm) const {
        std::uint64_t s = 0;
        for (const auto& [pat, data] : patterns)
            s += data.partition_timesteps[arm];
        return s;
    }
};

TupleLabels build_tuple_labels(const std::vector<LabelField>& clusterings,
                               std::size_t nt, std::size_t npart);

// Maximal-run compression of one already-valid symbol sequence.
std::vector<Run> deduplicate(const std::vector<Symbol>& symbols);

RunSequence deduplicate(const TupleLabels& labels);

// Slide windows of n_min..n_max consecutive runs over each segment; a window
// is emitted only while its symbols stay pairwise distinct (acyclic), so a
// window that would extend an acyclic prefix with a repeated symbol is
// truncated at the shorter length.
void mine_ngrams(const RunSequence& runs, std::size_t n_min, std::size_t n_max,
                 std::uint8_t arm, std::uint16_t member, PatternIndex& index);

std::uint64_t partition_timesteps(const PatternIndex& index, const Pattern& pattern);

struct DurationHistogram {
    // duration (timesteps) -> [baseline count, forced count]
    std::map<std::size_t, std::array<std::uint64_t, 2>> bins;
};

DurationHistogram duration_stats(const PatternIndex& index, const Pattern& pattern);

// JSON-lines serialization; deterministic record order (map order).
void write_pattern_index(const PatternIndex& index, const std::filesystem::path& path,
                         bool with_occurrences = true);
PatternIndex read_pattern_index(const std::filesystem::path& path);

}  // namespace pathway
