#include "pathway/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "pathway/errors.hpp"
#include "pathway/svg.hpp"
#include "pathway/util.hpp"

namespace fs = std::filesystem;
using json = nlohmann::json;

namespace pathway {

namespace {

const char* kArmNames[2] = {"baseline", "forced"};

SignatureSpec parse_spec(const json& j) {
    if (j.is_string()) {
        std::string s = j.get<std::string>();
        if (s == "mean") return SignatureSpec::mean();
        if (s == "percentile5") return SignatureSpec::percentile5();
        throw ConfigError("unknown signature spec name '" + s + "'");
    }
    if (!j.is_object() || !j.contains("kind"))
        throw ConfigError("signature spec must be a name or an object with 'kind'");
    std::string kind = j["kind"].get<std::string>();
    if (kind == "mean") return SignatureSpec::mean();
    if (kind != "percentile") throw ConfigError("unknown signature kind '" + kind + "'");
    SignatureSpec spec;
    spec.kind = SignatureSpec::Kind::percentile;
    spec.quantiles = j.at("quantiles").get<std::vector<double>>();
    spec.validate();
    return spec;
}

std::string spec_name(const SignatureSpec& spec) {
    if (spec.kind == SignatureSpec::Kind::mean) return "mean";
    std::string s = "percentile(";
    for (std::size_t i = 0; i < spec.quantiles.size(); ++i) {
        if (i) s += " ";
        s += format_double(spec.quantiles[i]);
    }
    return s + ")";
}

ScenarioConfig parse_scenario(const json& j) {
    ScenarioConfig sc;
    sc.nt = j.value("nt", sc.nt);
    sc.nlat = j.value("nlat", sc.nlat);
    sc.nlon = j.value("nlon", sc.nlon);
    sc.ensemble = j.value("ensemble", sc.ensemble);
    sc.t_event = j.value("t_event", sc.t_event);
    sc.event_lat = j.value("event_lat", sc.event_lat);
    sc.event_lon = j.value("event_lon", sc.event_lon);
    sc.spread_rate = j.value("spread_rate", sc.spread_rate);
    sc.gain_a = j.value("gain_a", sc.gain_a);
    sc.gain_b = j.value("gain_b", sc.gain_b);
    sc.gain_c = j.value("gain_c", sc.gain_c);
    sc.lag_c = j.value("lag_c", sc.lag_c);
    sc.noise_rho = j.value("noise_rho", sc.noise_rho);
    sc.noise_amp = j.value("noise_amp", sc.noise_amp);
    sc.seed = j.value("seed", sc.seed);
    sc.polar_missing_rows = j.value("polar_missing_rows", sc.polar_missing_rows);
    return sc;
}

json scenario_to_json(const ScenarioConfig& sc) {
    return json{{"nt", sc.nt},
                {"nlat", sc.nlat},
                {"nlon", sc.nlon},
                {"ensemble", sc.ensemble},
                {"t_event", sc.t_event},
                {"event_lat", sc.event_lat},
                {"event_lon", sc.event_lon},
                {"spread_rate", sc.spread_rate},
                {"gain_a", sc.gain_a},
                {"gain_b", sc.gain_b},
                {"gain_c", sc.gain_c},
                {"lag_c", sc.lag_c},
                {"noise_rho", sc.noise_rho},
                {"noise_amp", sc.noise_amp},
                {"seed", sc.seed},
                {"polar_missing_rows", sc.polar_missing_rows}};
}

void apply_override(json& root, const std::string& key, const std::string& value) {
    json* node = &root;
    std::size_t start = 0;
    while (true) {
        std::size_t dot = key.find('.', start);
        std::string part = key.substr(start, dot == std::string::npos ? dot : dot - start);
        if (part.empty()) throw ConfigError("bad --set key '" + key + "'");
        if (dot == std::string::npos) {
            json parsed;
            try {
                parsed = json::parse(value);
            } catch (const json::exception&) {
                parsed = value;  // bare strings are fine
            }
            (*node)[part] = parsed;
            return;
        }
        node = &(*node)[part];
        start = dot + 1;
    }
}

std::ofstream open_out(const fs::path& path) {
    fs::create_directories(path.parent_path());
    std::ofstream f(path, std::ios::trunc);
    if (!f) throw DataError("cannot write " + path.string());
    return f;
}

const char* flag_name(SigFlag f) {
    switch (f) {
        case SigFlag::increase: return "increase";
        case SigFlag::decrease: return "decrease";
        default: return "none";
    }
}

}  // namespace

const SignatureSpec& RunConfig::spec_for(const std::string& variable) const {
    auto it = signature.find(variable);
    if (it != signature.end()) return it->second;
    static const SignatureSpec fallback = SignatureSpec::percentile5();
    auto def = signature.find("*");
    return def != signature.end() ? def->second : fallback;
}

RunConfig load_config(const fs::path& path,
                      const std::vector<std::pair<std::string, std::string>>& overrides,
                      const std::optional<fs::path>& out_override, int threads) {
    std::ifstream f(path);
    if (!f) throw ConfigError("cannot open config file: " + path.string());
    json j;
    try {
        f >> j;
    } catch (const json::exception& e) {
        throw ConfigError("config parse error in " + path.string() + ": " + e.what());
    }
    for (const auto& [k, v] : overrides) apply_override(j, k, v);

    RunConfig cfg;
    cfg.threads = threads;
    cfg.seed = j.value("seed", cfg.seed);
    if (const char* env = std::getenv("PATHWAY_MINER_SEED")) {
        try {
            cfg.seed = std::stoull(env);
        } catch (const std::exception&) {
            throw ConfigError("PATHWAY_MINER_SEED is not an integer");
        }
    }
    cfg.out_dir = j.value("out", std::string("out"));
    if (out_override) cfg.out_dir = *out_override;

    bool has_scenario = j.contains("scenario");
    bool has_datasets = j.contains("datasets");
    if (has_scenario == has_datasets)
        throw ConfigError("config must contain exactly one of 'scenario' or 'datasets'");
    if (has_scenario) {
        cfg.scenario = parse_scenario(j["scenario"]);
        if (!j["scenario"].contains("seed")) cfg.scenario->seed = cfg.seed;
        cfg.scenario->validate();
    } else {
        for (const auto& d : j["datasets"].at("forced"))
            cfg.forced_dirs.emplace_back(d.get<std::string>());
        for (const auto& d : j["datasets"].at("baseline"))
            cfg.baseline_dirs.emplace_back(d.get<std::string>());
        if (cfg.forced_dirs.size() != cfg.baseline_dirs.size() || cfg.forced_dirs.empty())
            throw ConfigError("datasets.forced and datasets.baseline must pair up");
    }

    cfg.variables = j.value("variables",
                            std::vector<std::string>{kVarA, kVarB, kVarC});
    if (cfg.variables.empty()) throw ConfigError("config: 'variables' must be non-empty");

    cfg.partition_size = j.value("partition_size", cfg.partition_size);
    if (j.contains("signature")) {
        const json& js = j["signature"];
        if (js.is_string() || js.contains("kind")) {
            cfg.signature["*"] = parse_spec(js);
        } else {
            for (auto it = js.begin(); it != js.end(); ++it)
                cfg.signature[it.key()] = parse_spec(it.value());
        }
    }
    if (j.contains("k"))
        for (auto it = j["k"].begin(); it != j["k"].end(); ++it)
            cfg.k[it.key()] = it.value().get<std::size_t>();

    if (j.contains("k_range")) {
        auto kr = j["k_range"].get<std::vector<std::size_t>>();
        if (kr.size() == 2 && kr[0] <= kr[1]) {
            for (std::size_t kv = kr[0]; kv <= kr[1]; ++kv) cfg.k_range.push_back(kv);
        } else {
            cfg.k_range = kr;
        }
    }
    cfg.p_range = j.value("p_range", std::vector<std::size_t>{cfg.partition_size});
    if (j.contains("spec_set"))
        for (const auto& s : j["spec_set"]) {
            SignatureSpec spec = parse_spec(s);
            cfg.spec_set.emplace_back(spec_name(spec), spec);
        }

    cfg.alpha = j.value("alpha", cfg.alpha);
    cfg.n_min = j.value("n_min", cfg.n_min);
    cfg.n_max = j.value("n_max", cfg.n_max);
    if (j.contains("rules")) cfg.rules_path = j["rules"].get<std::string>();
    cfg.trim_poles_rows = j.value("trim_poles", cfg.trim_poles_rows);
    std::string mp = j.value("missing_policy", std::string("exclude"));
    if (mp == "exclude")
        cfg.missing_policy = MissingPolicy::exclude;
    else if (mp == "partition_invalid")
        cfg.missing_policy = MissingPolicy::partition_invalid;
    else
        throw ConfigError("unknown missing_policy '" + mp + "'");
    return cfg;
}

EnsemblePair load_ensemble(const RunConfig& cfg) {
    EnsemblePair pair;
    if (cfg.scenario) {
        fs::path data = cfg.out_dir / "data";
        for (std::size_t e = 0; e < cfg.scenario->ensemble; ++e) {
            fs::path fdir = data / ("forced_" + std::to_string(e));
            fs::path bdir = data / ("baseline_" + std::to_string(e));
            if (!fs::exists(fdir / "manifest.json") || !fs::exists(bdir / "manifest.json"))
                throw DataError("scenario datasets not found under " + data.string() +
                                "; run the 'gen' subcommand first");
            pair.forced.push_back(load_dataset(fdir));
            pair.baseline.push_back(load_dataset(bdir));
        }
    } else {
        for (const auto& d : cfg.forced_dirs) pair.forced.push_back(load_dataset(d));
        for (const auto& d : cfg.baseline_dirs) pair.baseline.push_back(load_dataset(d));
    }
    if (cfg.trim_poles_rows > 0) {
        for (auto& ds : pair.forced) ds = trim_poles(ds, cfg.trim_poles_rows);
        for (auto& ds : pair.baseline) ds = trim_poles(ds, cfg.trim_poles_rows);
    }
    return pair;
}

void save_cluster_artifacts(const ClusterArtifacts& art, const fs::path& dir) {
    fs::create_directories(dir);
    json j;
    j["variable"] = art.variable;
    j["k"] = art.k;
    j["dim"] = art.dim;
    j["seed"] = art.seed;
    j["inertia"] = art.inertia;
    j["centroids"] = art.centroids;
    j["permutation"] = art.permutation;
    j["nt"] = art.nt;
    j["npart"] = art.npart;
    j["members"] = art.labels.empty() ? 0 : art.labels[0].size();
    auto mf = open_out(dir / ("clustering_" + art.variable + ".json"));
    mf << j.dump(2) << "\n";

    for (int arm = 0; arm < 2; ++arm) {
        for (std::size_t e = 0; e < art.labels[static_cast<std::size_t>(arm)].size(); ++e) {
            const LabelField& lf = art.labels[static_cast<std::size_t>(arm)][e];
            std::vector<std::uint16_t> buf(lf.size());
            for (std::size_t i = 0; i < lf.size(); ++i)
                buf[i] = lf[i] < 0 ? 0xFFFF : static_cast<std::uint16_t>(lf[i]);
            std::ofstream bf(dir / ("labels_" + art.variable + "_" + kArmNames[arm] +
                                    "_" + std::to_string(e) + ".bin"),
                             std::ios::binary | std::ios::trunc);
            if (!bf) throw DataError("cannot write labels for " + art.variable);
            bf.write(reinterpret_cast<const char*>(buf.data()),
                     static_cast<std::streamsize>(buf.size() * 2));
        }
    }
}

ClusterArtifacts load_cluster_artifacts(const fs::path& dir, const std::string& variable) {
    fs::path mpath = dir / ("clustering_" + variable + ".json");
    std::ifstream mf(mpath);
    if (!mf)
        throw DataError("missing clustering artifact " + mpath.string() +
                        "; run the 'cluster' subcommand first");
    json j;
    mf >> j;
    ClusterArtifacts art;
    art.variable = variable;
    art.k = j.at("k").get<std::size_t>();
    art.dim = j.at("dim").get<std::size_t>();
    art.seed = j.at("seed").get<std::uint64_t>();
    art.inertia = j.at("inertia").get<double>();
    art.centroids = j.at("centroids").get<std::vector<double>>();
    art.permutation = j.at("permutation").get<std::vector<int>>();
    art.nt = j.at("nt").get<std::size_t>();
    art.npart = j.at("npart").get<std::size_t>();
    std::size_t members = j.at("members").get<std::size_t>();

    art.labels.assign(2, std::vector<LabelField>(members));
    for (int arm = 0; arm < 2; ++arm)
        for (std::size_t e = 0; e < members; ++e) {
            fs::path bpath = dir / ("labels_" + variable + "_" + kArmNames[arm] + "_" +
                                    std::to_string(e) + ".bin");
            std::ifstream bf(bpath, std::ios::binary);
            if (!bf) throw DataError("missing labels file " + bpath.string());
            std::vector<std::uint16_t> buf(art.nt * art.npart);
            bf.read(reinterpret_cast<char*>(buf.data()),
                    static_cast<std::streamsize>(buf.size() * 2));
            if (!bf) throw DataError("short labels file " + bpath.string());
            LabelField lf(buf.size());
            for (std::size_t i = 0; i < buf.size(); ++i)
                lf[i] = buf[i] == 0xFFFF ? -1 : static_cast<std::int32_t>(buf[i]);
            art.labels[static_cast<std::size_t>(arm)][e] = std::move(lf);
        }
    return art;
}

void cmd_gen(const RunConfig& cfg) {
    if (!cfg.scenario) throw ConfigError("gen: config has no 'scenario' section");
    EnsemblePair pair = generate_scenario(*cfg.scenario, cfg.threads);
    fs::path data = cfg.out_dir / "data";
    for (std::size_t e = 0; e < pair.forced.size(); ++e) {
        write_dataset(pair.forced[e], data / ("forced_" + std::to_string(e)));
        write_dataset(pair.baseline[e], data / ("baseline_" + std::to_string(e)));
    }
    auto sf = open_out(data / "scenario.json");
    sf << scenario_to_json(*cfg.scenario).dump(2) << "\n";
}

void cmd_stability(const RunConfig& cfg) {
    if (cfg.k_range.empty()) throw ConfigError("stability: empty k range");
    EnsemblePair pair = load_ensemble(cfg);

    std::vector<std::pair<std::string, SignatureSpec>> specs = cfg.spec_set;

    auto table = open_out(cfg.out_dir / "stability.csv");
    table << "variable,p,signature,k,averaged_ari,near_optimal_inertia\n";
    auto recs = open_out(cfg.out_dir / "stability_recommendations.csv");
    recs << "variable,p,signature,recommended_k,qualifying_peaks,tie_fallback\n";
    json rec_json = json::object();

    for (const auto& var : cfg.variables) {
        std::vector<std::pair<std::string, SignatureSpec>> var_specs = specs;
        if (var_specs.empty())
            var_specs.emplace_back(spec_name(cfg.spec_for(var)), cfg.spec_for(var));

        for (std::size_t p : cfg.p_range) {
            for (const auto& [sname, spec] : var_specs) {
                // concatenate valid signature rows over all members, both arms
                std::vector<double> points;
                std::size_t n = 0, d = spec.dim();
                for (const auto* arm : {&pair.baseline, &pair.forced}) {
                    for (const auto& ds : *arm) {
                        PartitionGrid grid = make_partitions(ds, p);
                        SignatureTensor sig =
                            compute_signatures(ds, grid, spec, var, cfg.missing_policy);
                        for (std::size_t t = 0; t < sig.nt; ++t)
                            for (std::size_t part = 0; part < sig.npart; ++part)
                                if (sig.is_valid(t, part)) {
                                    const double* r = sig.row(t, part);
                                    points.insert(points.end(), r, r + d);
                                    ++n;
                                }
                    }
                }
                SweepResult res =
                    stability_sweep_k(points, n, d, cfg.k_range, cfg.seed, cfg.threads);
                for (const auto& row : res.rows)
                    table << var << "," << p << "," << sname << "," << row.k << ","
                          << format_double(row.averaged_ari) << ","
                          << format_double(row.near_optimal_inertia) << "\n";
                recs << var << "," << p << "," << sname << "," << res.recommended_k
                     << ",";
                for (std::size_t i = 0; i < res.peaks.size(); ++i)
                    recs << (i ? " " : "") << res.peaks[i];
                recs << "," << (res.tie_fallback ? "yes" : "no") << "\n";
                if (p == cfg.partition_size && &var_specs.front().second == &spec)
                    rec_json[var] = res.recommended_k;
            }
        }
    }
    auto jf = open_out(cfg.out_dir / "stability_recommend.json");
    jf << rec_json.dump(2) << "\n";
}

void cmd_cluster(const RunConfig& cfg) {
    EnsemblePair pair = load_ensemble(cfg);
    for (std::size_t vi = 0; vi < cfg.variables.size(); ++vi) {
        const std::string& var = cfg.variables[vi];
        auto kit = cfg.k.find(var);
        if (kit == cfg.k.end())
            throw ConfigError("cluster: no k configured for variable '" + var + "'");
        std::size_t k = kit->second;
        const SignatureSpec& spec = cfg.spec_for(var);
        std::size_t d = spec.dim();

        // fit on the concatenation of all members, both arms, all timesteps
        std::vector<SignatureTensor> tensors[2];
        std::vector<double> points;
        std::size_t n = 0, nt = 0, npart = 0;
        int arm = 0;
        for (const auto* members : {&pair.baseline, &pair.forced}) {
            for (const auto& ds : *members) {
                PartitionGrid grid = make_partitions(ds, cfg.partition_size);
                SignatureTensor sig =
                    compute_signatures(ds, grid, spec, var, cfg.missing_policy);
                nt = sig.nt;
                npart = sig.npart;
                for (std::size_t t = 0; t < sig.nt; ++t)
                    for (std::size_t part = 0; part < sig.npart; ++part)
                        if (sig.is_valid(t, part)) {
                            const double* r = sig.row(t, part);
                            points.insert(points.end(), r, r + d);
                            ++n;
                        }
                tensors[arm].push_back(std::move(sig));
            }
            ++arm;
        }
        if (n < k)
            throw DataError("cluster: variable '" + var + "' has only " +
                            std::to_string(n) + " valid signature rows but k=" +
                            std::to_string(k));

        Clustering model = kmeans(points, n, d, k, KmeansInit::plusplus,
                                  cfg.seed + vi);
        std::vector<int> perm = relabel_by_centroid(model);

        ClusterArtifacts art;
        art.variable = var;
        art.k = k;
        art.dim = d;
        art.centroids = model.centroids;
        art.permutation = perm;
        art.seed = model.seed;
        art.inertia = model.inertia;
        art.nt = nt;
        art.npart = npart;
        art.labels.assign(2, {});
        for (int a = 0; a < 2; ++a)
            for (const auto& sig : tensors[a])
                art.labels[static_cast<std::size_t>(a)].push_back(
                    assign_labels(sig, model.centroids, k, d));
        save_cluster_artifacts(art, cfg.out_dir);
    }
}

void cmd_detect(const RunConfig& cfg) {
    EnsemblePair pair = load_ensemble(cfg);
    PartitionGrid grid = make_partitions(pair.baseline[0], cfg.partition_size);
    std::size_t members = pair.forced.size();

    for (const auto& var : cfg.variables) {
        ClusterArtifacts art = load_cluster_artifacts(cfg.out_dir, var);
        std::vector<MembershipSeries> mem[2];
        for (int arm = 0; arm < 2; ++arm)
            for (std::size_t e = 0; e < members; ++e)
                mem[arm].push_back(membership_counts(
                    art.labels[static_cast<std::size_t>(arm)][e], art.nt, art.npart,
                    art.k));

        // membership CSV: one row per (arm, member, timestep)
        auto mcsv = open_out(cfg.out_dir / ("membership_" + var + ".csv"));
        mcsv << "time,arm,member,valid_total";
        for (std::size_t c = 0; c < art.k; ++c) mcsv << ",count_" << c << ",frac_" << c;
        mcsv << "\n";
        for (int arm = 0; arm < 2; ++arm)
            for (std::size_t e = 0; e < members; ++e)
                for (std::size_t t = 0; t < art.nt; ++t) {
                    const auto& ms = mem[arm][e];
                    mcsv << t << "," << kArmNames[arm] << "," << e << ","
                         << ms.valid_total[t];
                    for (std::size_t c = 0; c < art.k; ++c)
                        mcsv << "," << ms.counts[c][t] << ","
                             << format_double(ms.fraction[c][t]);
                    mcsv << "\n";
                }

        // per-cluster significance and timeline SVGs
        std::vector<SignificanceSeries> sig(art.k);
        parallel_for(art.k, cfg.threads, [&](std::size_t c) {
            sig[c] = detect_significance(mem[1], mem[0], c, cfg.alpha);
        });
        auto scsv = open_out(cfg.out_dir / ("significance_" + var + ".csv"));
        scsv << "time";
        for (std::size_t c = 0; c < art.k; ++c)
            scsv << ",t_stat_" << c << ",p_value_" << c << ",flag_" << c;
        scsv << "\n";
        for (std::size_t t = 0; t < art.nt; ++t) {
            scsv << t;
            for (std::size_t c = 0; c < art.k; ++c)
                scsv << "," << format_double(sig[c].t_stat[t]) << ","
                     << format_double(sig[c].p_value[t]) << ","
                     << flag_name(sig[c].flag[t]);
            scsv << "\n";
        }
        for (std::size_t c = 0; c < art.k; ++c) {
            std::vector<std::vector<double>> fs, bs;
            for (std::size_t e = 0; e < members; ++e) {
                fs.push_back(mem[1][e].fraction[c]);
                bs.push_back(mem[0][e].fraction[c]);
            }
            svg_timeline(cfg.out_dir / ("membership_" + var + "_c" + std::to_string(c) +
                                        ".svg"),
                         fs, bs, sig[c].flag,
                         var + " cluster " + std::to_string(c) + " membership fraction");
        }

        // latitude-mode matrices for member 0 of each arm
        for (int arm = 0; arm < 2; ++arm) {
            auto mode = latitude_mode(art.labels[static_cast<std::size_t>(arm)][0],
                                      art.nt, grid);
            auto lcsv = open_out(cfg.out_dir /
                                 ("latmode_" + var + "_" + kArmNames[arm] + ".csv"));
            lcsv << "lat_band";
            for (std::size_t t = 0; t < art.nt; ++t) lcsv << ",t" << t;
            lcsv << "\n";
            std::vector<std::vector<double>> img(grid.nrow,
                                                 std::vector<double>(art.nt));
            for (std::size_t r = 0; r < grid.nrow; ++r) {
                lcsv << format_double(grid.band_lat[r]);
                for (std::size_t t = 0; t < art.nt; ++t) {
                    lcsv << "," << mode[r][t];
                    img[grid.nrow - 1 - r][t] = mode[r][t];
                }
                lcsv << "\n";
            }
            svg_heatmap(cfg.out_dir / ("latmode_" + var + "_" + kArmNames[arm] + ".svg"),
                        img, var + " modal cluster per latitude (" + kArmNames[arm] + ")",
                        "time", "latitude");
        }

        // per-cluster value statistics pooled over all members, both arms
        std::vector<double> sum(art.k, 0.0), sumsq(art.k, 0.0);
        std::vector<std::size_t> cnt(art.k, 0);
        for (int arm = 0; arm < 2; ++arm) {
            const auto& sets = arm == 0 ? pair.baseline : pair.forced;
            for (std::size_t e = 0; e < members; ++e) {
                const Variable& v = sets[e].variable(var);
                const LabelField& lf = art.labels[static_cast<std::size_t>(arm)][e];
                for (std::size_t t = 0; t < art.nt; ++t)
                    for (std::size_t part = 0; part < art.npart; ++part) {
                        std::int32_t l = lf[t * art.npart + part];
                        if (l < 0) continue;
                        std::size_t r = grid.row_of(part), cc = grid.col_of(part);
                        for (std::size_t i = r * grid.p; i < (r + 1) * grid.p; ++i)
                            for (std::size_t jj = cc * grid.p; jj < (cc + 1) * grid.p;
                                 ++jj) {
                                std::size_t idx = sets[e].at(t, i, jj);
                                if (v.missing[idx]) continue;
                                double x = v.values[idx];
                                sum[static_cast<std::size_t>(l)] += x;
                                sumsq[static_cast<std::size_t>(l)] += x * x;
                                cnt[static_cast<std::size_t>(l)]++;
                            }
                    }
            }
        }
        auto stcsv = open_out(cfg.out_dir / ("stats_" + var + ".csv"));
        stcsv << "cluster,count,mean,stddev\n";
        for (std::size_t c = 0; c < art.k; ++c) {
            if (cnt[c] == 0) {
                stcsv << c << ",0,,\n";
                continue;
            }
            double m = sum[c] / static_cast<double>(cnt[c]);
            double var2 = cnt[c] > 1
                              ? std::max(0.0, (sumsq[c] - sum[c] * m) /
                                                  static_cast<double>(cnt[c] - 1))
                              : 0.0;
            stcsv << c << "," << cnt[c] << "," << format_double(m) << ","
                  << format_double(std::sqrt(var2)) << "\n";
        }
    }
}

void cmd_mine(const RunConfig& cfg) {
    std::vector<ClusterArtifacts> arts;
    for (const auto& var : cfg.variables)
        arts.push_back(load_cluster_artifacts(cfg.out_dir, var));
    std::size_t nt = arts[0].nt, npart = arts[0].npart;
    std::size_t members = arts[0].labels[0].size();
    for (const auto& a : arts)
        if (a.nt != nt || a.npart != npart || a.labels[0].size() != members)
            throw DataError("mine: clustering artifacts disagree on shape");

    PatternIndex index;
    for (int arm = 0; arm < 2; ++arm)
        for (std::size_t e = 0; e < members; ++e) {
            std::vector<LabelField> fields;
            for (const auto& a : arts)
                fields.push_back(a.labels[static_cast<std::size_t>(arm)][e]);
            TupleLabels tl = build_tuple_labels(fields, nt, npart);
            RunSequence runs = deduplicate(tl);
            mine_ngrams(runs, cfg.n_min, cfg.n_max, static_cast<std::uint8_t>(arm),
                        static_cast<std::uint16_t>(e), index);
        }
    write_pattern_index(index, cfg.out_dir / "patterns.jsonl");

    json summary;
    summary["unique_patterns"] = index.patterns.size();
    summary["partition_timesteps"] = {{"baseline", index.total_partition_timesteps(0)},
                                      {"forced", index.total_partition_timesteps(1)}};
    summary["n_min"] = cfg.n_min;
    summary["n_max"] = cfg.n_max;
    summary["members"] = members;
    auto sf = open_out(cfg.out_dir / "mine_summary.json");
    sf << summary.dump(2) << "\n";
}

void cmd_assert(const RunConfig& cfg) {
    PatternIndex index = read_pattern_index(cfg.out_dir / "patterns.jsonl");
    RuleSet rules;
    if (!cfg.rules_path.empty()) rules = load_rules(cfg.rules_path);
    PatternIndex filtered = filter_patterns(index, rules, cfg.variables);
    write_pattern_index(filtered, cfg.out_dir / "filtered.jsonl");

    // shape comes from the clustering artifacts
    ClusterArtifacts art = load_cluster_artifacts(cfg.out_dir, cfg.variables[0]);
    std::size_t nt = art.nt, npart = art.npart;
    std::size_t members = art.labels[0].size();

    std::vector<PrevalenceSeries> prev[2];
    for (int arm = 0; arm < 2; ++arm) {
        prev[arm].resize(members);
        parallel_for(members, cfg.threads, [&, arm](std::size_t e) {
            prev[arm][e] = prevalence(filtered, nt, npart,
                                      static_cast<std::uint8_t>(arm),
                                      static_cast<std::uint16_t>(e));
        });
    }
    SignificanceSeries sig = prevalence_significance(prev[1], prev[0], cfg.alpha);

    auto pcsv = open_out(cfg.out_dir / "prevalence.csv");
    pcsv << "time";
    for (int arm = 0; arm < 2; ++arm)
        for (std::size_t e = 0; e < members; ++e)
            pcsv << "," << kArmNames[arm] << "_" << e << "_active," << kArmNames[arm]
                 << "_" << e << "_instances";
    pcsv << ",t_stat,p_value,flag\n";
    for (std::size_t t = 0; t < nt; ++t) {
        pcsv << t;
        for (int arm = 0; arm < 2; ++arm)
            for (std::size_t e = 0; e < members; ++e)
                pcsv << "," << prev[arm][e].active_count[t] << ","
                     << prev[arm][e].instance_count[t];
        pcsv << "," << format_double(sig.t_stat[t]) << ","
             << format_double(sig.p_value[t]) << "," << flag_name(sig.flag[t]) << "\n";
    }

    // packed per-timestep partition bitmaps (row-major, 8 partitions per byte)
    std::size_t stride = (npart + 7) / 8;
    for (int arm = 0; arm < 2; ++arm)
        for (std::size_t e = 0; e < members; ++e) {
            std::vector<std::uint8_t> packed(nt * stride, 0);
            for (std::size_t t = 0; t < nt; ++t)
                for (std::size_t p = 0; p < npart; ++p)
                    if (prev[arm][e].active[t * npart + p])
                        packed[t * stride + p / 8] |=
                            static_cast<std::uint8_t>(1u << (p % 8));
            std::ofstream bf(cfg.out_dir / ("prevalence_" + std::string(kArmNames[arm]) +
                                            "_" + std::to_string(e) + ".bits"),
                             std::ios::binary | std::ios::trunc);
            bf.write(reinterpret_cast<const char*>(packed.data()),
                     static_cast<std::streamsize>(packed.size()));
        }

    // duration histogram for the top filtered pattern by partition-timesteps
    const Pattern* top = nullptr;
    std::uint64_t top_pts = 0;
    for (const auto& [pat, data] : filtered.patterns) {
        std::uint64_t pts = data.partition_timesteps[0] + data.partition_timesteps[1];
        if (pts > top_pts) {
            top_pts = pts;
            top = &pat;
        }
    }
    auto dcsv = open_out(cfg.out_dir / "durations.csv");
    dcsv << "duration,baseline_count,forced_count\n";
    if (top) {
        DurationHistogram h = duration_stats(filtered, *top);
        for (const auto& [dur, counts] : h.bins)
            dcsv << dur << "," << counts[0] << "," << counts[1] << "\n";
    }

    // prevalence timeline and a map snapshot at the forced-arm peak
    std::vector<std::vector<double>> fs, bs;
    for (std::size_t e = 0; e < members; ++e) {
        std::vector<double> a(nt), b(nt);
        for (std::size_t t = 0; t < nt; ++t) {
            a[t] = static_cast<double>(prev[1][e].active_count[t]);
            b[t] = static_cast<double>(prev[0][e].active_count[t]);
        }
        fs.push_back(std::move(a));
        bs.push_back(std::move(b));
    }
    svg_timeline(cfg.out_dir / "prevalence.svg", fs, bs, sig.flag,
                 "pattern prevalence (active partitions)");

    std::size_t peak_t = 0;
    double peak_v = -1.0;
    for (std::size_t t = 0; t < nt; ++t) {
        double s = 0.0;
        for (std::size_t e = 0; e < members; ++e) s += fs[e][t];
        if (s > peak_v) {
            peak_v = s;
            peak_t = t;
        }
    }
    // map uses partition rows/cols; recompute the grid from the data
    EnsemblePair pair = load_ensemble(cfg);
    PartitionGrid grid = make_partitions(pair.baseline[0], cfg.partition_size);
    std::vector<std::uint8_t> snap(npart, 0);
    for (std::size_t p = 0; p < npart; ++p)
        snap[p] = prev[1][0].active[peak_t * npart + p];
    svg_map(cfg.out_dir / "prevalence_map.svg", snap, grid.nrow, grid.ncol,
            "active partitions at t=" + std::to_string(peak_t) + " (forced member 0)");

    json summary;
    summary["filtered_patterns"] = filtered.patterns.size();
    summary["partition_timesteps"] = {
        {"baseline", filtered.total_partition_timesteps(0)},
        {"forced", filtered.total_partition_timesteps(1)}};
    summary["peak_time"] = peak_t;
    auto sf = open_out(cfg.out_dir / "assert_summary.json");
    sf << summary.dump(2) << "\n";
}

void cmd_report(const RunConfig& cfg) {
    auto rf = open_out(cfg.out_dir / "report.md");
    rf << "# Pathway miner report\n\n";
    for (const char* name : {"mine_summary.json", "assert_summary.json",
                             "stability_recommend.json"}) {
        fs::path p = cfg.out_dir / name;
        if (!fs::exists(p)) continue;
        std::ifstream f(p);
        std::stringstream ss;
        ss << f.rdbuf();
        rf << "## " << name << "\n\n```json\n" << ss.str() << "```\n\n";
    }
    rf << "## Artifacts\n\n";
    std::vector<std::string> files;
    for (const auto& entry : fs::directory_iterator(cfg.out_dir))
        if (entry.is_regular_file()) files.push_back(entry.path().filename().string());
    std::sort(files.begin(), files.end());
    for (const auto& f : files) rf << "- " << f << "\n";
}

}  // namespace pathway
