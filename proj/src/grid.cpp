#include "pathway/grid.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>

#include <json.hpp>

#include "pathway/errors.hpp"
#include "pathway/util.hpp"

namespace fs = std::filesystem;
using json = nlohmann::json;

namespace pathway {

const Variable& FieldDataset::variable(const std::string& name) const {
    for (const auto& v : variables)
        if (v.name == name) return v;
    throw DataError("unknown variable: " + name);
}

bool FieldDataset::has_variable(const std::string& name) const {
    for (const auto& v : variables)
        if (v.name == name) return true;
    return false;
}

void ScenarioConfig::validate() const {
    if (nt == 0 || nlat == 0 || nlon == 0)
        throw ConfigError("scenario: grid dims must be positive");
    if (t_event >= nt)
        throw ConfigError("scenario: t_event must be < nt");
    if (ensemble < 1)
        throw ConfigError("scenario: ensemble size must be >= 1");
    if (spread_rate <= 0.0)
        throw ConfigError("scenario: spread_rate must be > 0");
}

namespace {

void check_axis(const std::vector<double>& axis, const char* name) {
    for (std::size_t i = 1; i < axis.size(); ++i)
        if (!(axis[i] > axis[i - 1]))
            throw DataError(std::string("non-monotone coordinate axis: ") + name);
}

Dtype parse_dtype(const std::string& s, const std::string& var) {
    if (s == "f32") return Dtype::f32;
    if (s == "f64") return Dtype::f64;
    throw DataError("variable " + var + ": unknown dtype '" + s + "'");
}

}  // namespace

FieldDataset load_dataset(const fs::path& dir) {
    fs::path mpath = dir / "manifest.json";
    std::ifstream mf(mpath);
    if (!mf) throw DataError("cannot open manifest: " + mpath.string());
    json m;
    try {
        mf >> m;
    } catch (const json::exception& e) {
        throw DataError("manifest parse error in " + mpath.string() + ": " + e.what());
    }

    if (!m.contains("format_version") || m["format_version"].get<int>() != 1)
        throw DataError("unknown format version in " + mpath.string());

    FieldDataset ds;
    const auto& dims = m.at("dims");
    std::size_t nt = dims.at("time").get<std::size_t>();
    std::size_t nlat = dims.at("nlat").get<std::size_t>();
    std::size_t nlon = dims.at("nlon").get<std::size_t>();

    ds.times = m.at("times").get<std::vector<std::string>>();
    ds.lats = m.at("lats").get<std::vector<double>>();
    ds.lons = m.at("lons").get<std::vector<double>>();
    if (ds.times.size() != nt) throw DataError("times length does not match dims.time");
    if (ds.lats.size() != nlat) throw DataError("lats length does not match dims.nlat");
    if (ds.lons.size() != nlon) throw DataError("lons length does not match dims.nlon");
    check_axis(ds.lats, "lats");
    check_axis(ds.lons, "lons");
    for (double v : ds.lats)
        if (v < -90.0 || v > 90.0) throw DataError("latitude out of [-90, 90]");

    for (const auto& jv : m.at("variables")) {
        Variable var;
        var.name = jv.at("name").get<std::string>();
        var.units = jv.value("units", "");
        var.dtype = parse_dtype(jv.at("dtype").get<std::string>(), var.name);
        var.sentinel = jv.at("sentinel").get<double>();
        fs::path payload = dir / jv.at("file").get<std::string>();

        std::ifstream pf(payload, std::ios::binary);
        if (!pf) throw DataError("variable " + var.name + ": missing payload file " +
                                 payload.string());
        pf.seekg(0, std::ios::end);
        std::size_t bytes = static_cast<std::size_t>(pf.tellg());
        pf.seekg(0);

        std::size_t n = nt * nlat * nlon;
        std::size_t esize = var.dtype == Dtype::f32 ? 4 : 8;
        if (bytes != n * esize)
            throw DataError("variable " + var.name + ": payload byte length " +
                            std::to_string(bytes) + " does not match shape (" +
                            std::to_string(nt) + "," + std::to_string(nlat) + "," +
                            std::to_string(nlon) + ")");

        var.values.resize(n);
        if (var.dtype == Dtype::f32) {
            std::vector<float> buf(n);
            pf.read(reinterpret_cast<char*>(buf.data()), static_cast<std::streamsize>(bytes));
            for (std::size_t i = 0; i < n; ++i) var.values[i] = buf[i];
        } else {
            pf.read(reinterpret_cast<char*>(var.values.data()),
                    static_cast<std::streamsize>(bytes));
        }
        if (!pf) throw DataError("variable " + var.name + ": short read");

        var.missing.assign(n, 0);
        for (std::size_t i = 0; i < n; ++i)
            if (var.values[i] == var.sentinel) var.missing[i] = 1;
        ds.variables.push_back(std::move(var));
    }
    return ds;
}

void write_dataset(const FieldDataset& ds, const fs::path& dir) {
    fs::create_directories(dir);
    json m;
    m["format_version"] = 1;
    m["dims"] = {{"time", ds.nt()}, {"nlat", ds.nlat()}, {"nlon", ds.nlon()}};
    m["times"] = ds.times;
    m["lats"] = ds.lats;
    m["lons"] = ds.lons;
    m["variables"] = json::array();

    for (const auto& var : ds.variables) {
        std::string fname = var.name + ".bin";
        m["variables"].push_back({{"name", var.name},
                                  {"units", var.units},
                                  {"dtype", var.dtype == Dtype::f32 ? "f32" : "f64"},
                                  {"file", fname},
                                  {"sentinel", var.sentinel}});
        std::ofstream pf(dir / fname, std::ios::binary | std::ios::trunc);
        if (!pf) throw DataError("cannot write payload for variable " + var.name);
        std::size_t n = var.values.size();
        if (var.dtype == Dtype::f32) {
            std::vector<float> buf(n);
            for (std::size_t i = 0; i < n; ++i) buf[i] = static_cast<float>(var.values[i]);
            pf.write(reinterpret_cast<const char*>(buf.data()),
                     static_cast<std::streamsize>(n * 4));
        } else {
            pf.write(reinterpret_cast<const char*>(var.values.data()),
                     static_cast<std::streamsize>(n * 8));
        }
    }
    std::ofstream mf(dir / "manifest.json", std::ios::trunc);
    if (!mf) throw DataError("cannot write manifest in " + dir.string());
    mf << m.dump(2) << "\n";
}

FieldDataset trim_poles(const FieldDataset& ds, std::size_t nrows) {
    if (2 * nrows >= ds.nlat())
        throw DataError("trim_poles: 2*nrows must be < NLAT");
    if (nrows == 0) return ds;

    FieldDataset out;
    out.times = ds.times;
    out.lons = ds.lons;
    out.lats.assign(ds.lats.begin() + static_cast<std::ptrdiff_t>(nrows),
                    ds.lats.end() - static_cast<std::ptrdiff_t>(nrows));
    std::size_t nlat2 = out.lats.size();
    for (const auto& var : ds.variables) {
        Variable v2;
        v2.name = var.name;
        v2.units = var.units;
        v2.dtype = var.dtype;
        v2.sentinel = var.sentinel;
        v2.values.reserve(ds.nt() * nlat2 * ds.nlon());
        v2.missing.reserve(v2.values.capacity());
        for (std::size_t t = 0; t < ds.nt(); ++t)
            for (std::size_t i = nrows; i < ds.nlat() - nrows; ++i) {
                std::size_t base = ds.at(t, i, 0);
                v2.values.insert(v2.values.end(), var.values.begin() + base,
                                 var.values.begin() + base + ds.nlon());
                v2.missing.insert(v2.missing.end(), var.missing.begin() + base,
                                  var.missing.begin() + base + ds.nlon());
            }
        out.variables.push_back(std::move(v2));
    }
    return out;
}

namespace {

// 1-D box blur (width 5). Longitude wraps, latitude clamps.
void blur_rows(std::vector<double>& f, std::size_t nlat, std::size_t nlon) {
    std::vector<double> row(nlon);
    for (std::size_t i = 0; i < nlat; ++i) {
        double* p = f.data() + i * nlon;
        for (std::size_t j = 0; j < nlon; ++j) {
            double s = 0.0;
            for (int d = -2; d <= 2; ++d) {
                std::size_t jj = (j + nlon + static_cast<std::size_t>(d + static_cast<int>(nlon))) % nlon;
                s += p[jj];
            }
            row[j] = s / 5.0;
        }
        std::copy(row.begin(), row.end(), p);
    }
}

void blur_cols(std::vector<double>& f, std::size_t nlat, std::size_t nlon) {
    std::vector<double> col(nlat);
    for (std::size_t j = 0; j < nlon; ++j) {
        for (std::size_t i = 0; i < nlat; ++i) {
            double s = 0.0;
            for (int d = -2; d <= 2; ++d) {
                long ii = static_cast<long>(i) + d;
                ii = std::clamp<long>(ii, 0, static_cast<long>(nlat) - 1);
                s += f[static_cast<std::size_t>(ii) * nlon + j];
            }
            col[i] = s / 5.0;
        }
        for (std::size_t i = 0; i < nlat; ++i) f[i * nlon + j] = col[i];
    }
}

// Inverse RMS of the combined 2-pass separable box kernel, so smoothed white
// noise keeps roughly unit variance.
double smoothing_gain() {
    std::vector<double> k{1.0};
    for (int pass = 0; pass < 2; ++pass) {
        std::vector<double> out(k.size() + 4, 0.0);
        for (std::size_t i = 0; i < k.size(); ++i)
            for (int d = 0; d < 5; ++d) out[i + static_cast<std::size_t>(d)] += k[i] / 5.0;
        k.swap(out);
    }
    double ss1 = 0.0;
    for (double w : k) ss1 += w * w;
    return 1.0 / std::sqrt(ss1 * ss1);  // separable: 2-D sumsq = (1-D sumsq)^2
}

std::vector<double> smooth_white(NormalRng& rng, std::size_t nlat, std::size_t nlon,
                                 double gain) {
    std::vector<double> f(nlat * nlon);
    for (auto& v : f) v = rng.normal();
    for (int pass = 0; pass < 2; ++pass) {
        blur_rows(f, nlat, nlon);
        blur_cols(f, nlat, nlon);
    }
    for (auto& v : f) v *= gain;
    return f;
}

struct VarSpec {
    const char* name;
    const char* units;
    double amp;  // noise amplitude in variable units (times cfg.noise_amp)
};

constexpr VarSpec kSpecs[3] = {
    {"AEROD_v", "-", 0.04},
    {"FLNT", "W m-2", 12.0},
    {"T050", "K", 2.5},
};

double base_value(int var, double lat) {
    switch (var) {
        case 0: return 0.12;
        case 1: return 240.0;
        default: return 230.0 - 25.0 * std::abs(lat) / 90.0;  // cooler poleward
    }
}

}  // namespace

double plume_value(const ScenarioConfig& cfg, std::size_t t, double lat, double lon) {
    if (t < cfg.t_event) return 0.0;
    double age = static_cast<double>(t - cfg.t_event);
    double ramp = 1.0 - std::exp(-age / 20.0);
    double sig_lon = 8.0 + cfg.spread_rate * age;
    double sig_lat = 5.0 + 0.25 * cfg.spread_rate * age;
    double dlat = lat - cfg.event_lat;
    double dlon = std::fmod(std::abs(lon - cfg.event_lon), 360.0);
    if (dlon > 180.0) dlon = 360.0 - dlon;
    double z = 0.5 * (dlat * dlat / (sig_lat * sig_lat) + dlon * dlon / (sig_lon * sig_lon));
    return ramp * std::exp(-z);
}

EnsemblePair generate_scenario(const ScenarioConfig& cfg, int threads) {
    cfg.validate();
    const std::size_t nt = cfg.nt, nlat = cfg.nlat, nlon = cfg.nlon;
    const double gain = smoothing_gain();

    std::vector<double> lats(nlat), lons(nlon);
    for (std::size_t i = 0; i < nlat; ++i)
        lats[i] = -90.0 + (static_cast<double>(i) + 0.5) * 180.0 / static_cast<double>(nlat);
    for (std::size_t j = 0; j < nlon; ++j)
        lons[j] = (static_cast<double>(j) + 0.5) * 360.0 / static_cast<double>(nlon);
    std::vector<std::string> times(nt);
    for (std::size_t t = 0; t < nt; ++t) times[t] = std::to_string(t);

    const double gains[3] = {cfg.gain_a, -cfg.gain_b, cfg.gain_c};

    EnsemblePair pair;
    pair.forced.resize(cfg.ensemble);
    pair.baseline.resize(cfg.ensemble);

    parallel_for(cfg.ensemble, threads, [&](std::size_t e) {
        FieldDataset base;
        base.times = times;
        base.lats = lats;
        base.lons = lons;

        for (int var = 0; var < 3; ++var) {
            Variable v;
            v.name = kSpecs[var].name;
            v.units = kSpecs[var].units;
            v.dtype = Dtype::f64;
            v.values.resize(nt * nlat * nlon);
            v.missing.assign(nt * nlat * nlon, 0);

            // independent stream per (member, variable)
            NormalRng rng(cfg.seed + e + 1000003ull * static_cast<std::uint64_t>(var + 1));
            std::vector<double> state = smooth_white(rng, nlat, nlon, gain);
            double rho = cfg.noise_rho;
            double drive = std::sqrt(std::max(0.0, 1.0 - rho * rho));
            double amp = kSpecs[var].amp * cfg.noise_amp;
            for (std::size_t t = 0; t < nt; ++t) {
                if (t > 0) {
                    std::vector<double> w = smooth_white(rng, nlat, nlon, gain);
                    for (std::size_t c = 0; c < state.size(); ++c)
                        state[c] = rho * state[c] + drive * w[c];
                }
                for (std::size_t i = 0; i < nlat; ++i)
                    for (std::size_t j = 0; j < nlon; ++j)
                        v.values[(t * nlat + i) * nlon + j] =
                            base_value(var, lats[i]) + amp * state[i * nlon + j];
            }
            base.variables.push_back(std::move(v));
        }

        FieldDataset forced = base;
        for (int var = 0; var < 3; ++var) {
            if (gains[var] == 0.0) continue;
            Variable& v = forced.variables[static_cast<std::size_t>(var)];
            std::size_t lag = (var == 2) ? cfg.lag_c : 0;
            for (std::size_t t = cfg.t_event + lag; t < nt; ++t)
                for (std::size_t i = 0; i < nlat; ++i)
                    for (std::size_t j = 0; j < nlon; ++j)
                        v.values[(t * nlat + i) * nlon + j] +=
                            gains[var] * plume_value(cfg, t - lag, lats[i], lons[j]);
        }

        if (cfg.polar_missing_rows > 0) {
            for (FieldDataset* ds : {&base, &forced}) {
                Variable& v = ds->variables[0];  // AEROD_v only
                for (std::size_t t = 0; t < nt; ++t)
                    for (std::size_t i = 0; i < nlat; ++i) {
                        if (i >= cfg.polar_missing_rows &&
                            i < nlat - cfg.polar_missing_rows)
                            continue;
                        for (std::size_t j = 0; j < nlon; ++j) {
                            std::size_t c = (t * nlat + i) * nlon + j;
                            v.values[c] = v.sentinel;
                            v.missing[c] = 1;
                        }
                    }
            }
        }

        pair.baseline[e] = std::move(base);
        pair.forced[e] = std::move(forced);
    });
    return pair;
}

}  // namespace pathway
