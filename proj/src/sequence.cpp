#include "pathway/sequence.hpp"

#include <algorithm>
#include <fstream>
#include <set>

#include <json.hpp>

#include "pathway/errors.hpp"

using json = nlohmann::json;

namespace pathway {

TupleLabels build_tuple_labels(const std::vector<LabelField>& clusterings,
                               std::size_t nt, std::size_t npart) {
    if (clusterings.empty()) throw ConfigError("build_tuple_labels: no clusterings");
    for (const auto& c : clusterings)
        if (c.size() != nt * npart)
            throw ConfigError("build_tuple_labels: clustering shape mismatch");

    TupleLabels tl;
    tl.nt = nt;
    tl.npart = npart;
    tl.arity = clusterings.size();
    tl.comps.resize(nt * npart * tl.arity);
    for (std::size_t cell = 0; cell < nt * npart; ++cell)
        for (std::size_t v = 0; v < tl.arity; ++v)
            tl.comps[cell * tl.arity + v] = clusterings[v][cell];
    return tl;
}

std::vector<Run> deduplicate(const std::vector<Symbol>& symbols) {
    std::vector<Run> runs;
    for (std::size_t t = 0; t < symbols.size(); ++t) {
        if (!runs.empty() && runs.back().symbol == symbols[t]) {
            runs.back().t_end = t;
        } else {
            runs.push_back(Run{symbols[t], t, t});
        }
    }
    return runs;
}

RunSequence deduplicate(const TupleLabels& labels) {
    RunSequence rs;
    rs.npart = labels.npart;
    rs.segments.resize(labels.npart);
    for (std::size_t p = 0; p < labels.npart; ++p) {
        std::vector<Run>* cur = nullptr;
        for (std::size_t t = 0; t < labels.nt; ++t) {
            if (!labels.is_valid(t, p)) {
                cur = nullptr;  // an invalid gap breaks evolution continuity
                continue;
            }
            Symbol s = labels.symbol(t, p);
            if (cur && !cur->empty() && cur->back().symbol == s) {
                cur->back().t_end = t;
                continue;
            }
            if (!cur) {
                rs.segments[p].emplace_back();
                cur = &rs.segments[p].back();
            }
            cur->push_back(Run{std::move(s), t, t});
        }
    }
    return rs;
}

void mine_ngrams(const RunSequence& runs, std::size_t n_min, std::size_t n_max,
                 std::uint8_t arm, std::uint16_t member, PatternIndex& index) {
    if (n_min < 1 || n_min > n_max)
        throw ConfigError("mine_ngrams: need 1 <= n_min <= n_max");
    Pattern window;
    for (std::size_t p = 0; p < runs.npart; ++p) {
        for (const auto& seg : runs.segments[p]) {
            for (std::size_t i = 0; i < seg.size(); ++i) {
                window.clear();
                std::size_t covered = 0;
                std::size_t limit = std::min(seg.size() - i, n_max);
                for (std::size_t n = 1; n <= limit; ++n) {
                    const Run& r = seg[i + n - 1];
                    // extending with a repeated symbol truncates the window
                    if (std::find(window.begin(), window.end(), r.symbol) !=
                        window.end())
                        break;
                    window.push_back(r.symbol);
                    covered += r.length();
                    if (n < n_min) continue;
                    PatternData& data = index.patterns[window];
                    data.occurrences.push_back(
                        Occurrence{arm, member, static_cast<std::uint32_t>(p),
                                   static_cast<std::uint32_t>(seg[i].t_start),
                                   static_cast<std::uint32_t>(r.t_end),
                                   static_cast<std::uint32_t>(covered)});
                    data.instances++;
                    data.partition_timesteps[arm] += covered;
                }
            }
        }
    }
}

std::uint64_t partition_timesteps(const PatternIndex& index, const Pattern& pattern) {
    auto it = index.patterns.find(pattern);
    if (it == index.patterns.end()) return 0;
    return it->second.partition_timesteps[0] + it->second.partition_timesteps[1];
}

DurationHistogram duration_stats(const PatternIndex& index, const Pattern& pattern) {
    DurationHistogram h;
    auto it = index.patterns.find(pattern);
    if (it == index.patterns.end()) return h;
    for (const auto& occ : it->second.occurrences) {
        std::size_t dur = static_cast<std::size_t>(occ.t_end - occ.t_start) + 1;
        auto& bin = h.bins[dur];
        bin[occ.arm]++;
    }
    return h;
}

void write_pattern_index(const PatternIndex& index, const std::filesystem::path& path,
                         bool with_occurrences) {
    std::ofstream f(path, std::ios::trunc);
    if (!f) throw DataError("cannot write pattern index: " + path.string());
    for (const auto& [pat, data] : index.patterns) {
        json rec;
        rec["symbols"] = pat;
        rec["instances"] = data.instances;
        rec["partition_timesteps"] = {{"baseline", data.partition_timesteps[0]},
                                      {"forced", data.partition_timesteps[1]}};
        if (with_occurrences) {
            json occs = json::array();
            for (const auto& o : data.occurrences)
                occs.push_back({o.arm, o.member, o.partition, o.t_start, o.t_end,
                                o.covered});
            rec["occurrences"] = std::move(occs);
        }
        f << rec.dump() << "\n";
    }
}

PatternIndex read_pattern_index(const std::filesystem::path& path) {
    std::ifstream f(path);
    if (!f) throw DataError("cannot open pattern index: " + path.string());
    PatternIndex index;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(f, line)) {
        ++lineno;
        if (line.empty()) continue;
        json rec;
        try {
            rec = json::parse(line);
        } catch (const json::exception& e) {
            throw DataError("pattern index " + path.string() + " line " +
                            std::to_string(lineno) + ": " + e.what());
        }
        Pattern pat = rec.at("symbols").get<Pattern>();
        PatternData data;
        data.instances = rec.at("instances").get<std::uint64_t>();
        data.partition_timesteps[0] =
            rec.at("partition_timesteps").at("baseline").get<std::uint64_t>();
        data.partition_timesteps[1] =
            rec.at("partition_timesteps").at("forced").get<std::uint64_t>();
        if (rec.contains("occurrences")) {
            for (const auto& jo : rec["occurrences"]) {
                Occurrence o;
                o.arm = jo.at(0).get<std::uint8_t>();
                o.member = jo.at(1).get<std::uint16_t>();
                o.partition = jo.at(2).get<std::uint32_t>();
                o.t_start = jo.at(3).get<std::uint32_t>();
                o.t_end = jo.at(4).get<std::uint32_t>();
                o.covered = jo.at(5).get<std::uint32_t>();
                data.occurrences.push_back(o);
            }
        }
        index.patterns.emplace(std::move(pat), std::move(data));
    }
    return index;
}

}  // namespace pathway
