#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace pathway {

enum class Dtype { f32, f64 };

struct Variable {
    std::string name;
    std::string units;
    Dtype dtype = Dtype::f64;
    double sentinel = -9999.0;
    std::vector<double> values;    // time-major, then lat, then lon
    std::vector<std::uint8_t> missing;  // same layout, 1 = masked
};

// Gridded (time x lat x lon) values for named variables with missing mask.
struct FieldDataset {
    std::vector<std::string> times;  // ISO dates or integer day indices
    std::vector<double> lats;        // strictly increasing, degrees
    std::vector<double> lons;        // strictly increasing, degrees
    std::vector<Variable> variables;

    std::size_t nt() const { return times.size(); }
    std::size_t nlat() const { return lats.size(); }
    std::size_t nlon() const { return lons.size(); }
    std::size_t cells() const { return nt() * nlat() * nlon(); }

    std::size_t at(std::size_t t, std::size_t i, std::size_t j) const {
        return (t * nlat() + i) * nlon() + j;
    }

    const Variable& variable(const std::string& name) const;
    bool has_variable(const std::string& name) const;
};

struct EnsemblePair {
    std::vector<FieldDataset> forced;
    std::vector<FieldDataset> baseline;
};

// Synthetic forced/counterfactual scenario: smooth AR(1) noise plus, in the
// forced arm, an additive plume that spreads zonally then poleward from the
// event location, raising variable A, lowering B and (after a lag) raising C.
struct ScenarioConfig {
    std::size_t nt = 365;
    std::size_t nlat = 36;
    std::size_t nlon = 72;
    std::size_t ensemble = 5;
    std::size_t t_event = 30;
    double event_lat = 10.0;
    double event_lon = 120.0;
    double spread_rate = 1.5;  // degrees of zonal sigma growth per timestep
    double gain_a = 1.0;
    double gain_b = 1.0;
    double gain_c = 1.0;
    std::size_t lag_c = 10;    // timesteps between A response and C response
    double noise_rho = 0.8;    // AR(1) coefficient
    double noise_amp = 1.0;    // noise scale multiplier
    std::uint64_t seed = 1;
    std::size_t polar_missing_rows = 0;  // AEROD_v masked in these edge rows

    void validate() const;  // throws ConfigError
};

// Manifest + flat-binary dataset directory format (format_version 1).
FieldDataset load_dataset(const std::filesystem::path& dir);
void write_dataset(const FieldDataset& ds, const std::filesystem::path& dir);

// Remove the first and last nrows latitude rows. Requires 2*nrows < NLAT.
FieldDataset trim_poles(const FieldDataset& ds, std::size_t nrows);

EnsemblePair generate_scenario(const ScenarioConfig& cfg, int threads = 1);

// Plume intensity in [0,1] at (t, lat, lon); zero before the event.
double plume_value(const ScenarioConfig& cfg, std::size_t t, double lat, double lon);

// Names of the three synthetic variables, in tuple order.
inline const char* kVarA = "AEROD_v";
inline const char* kVarB = "FLNT";
inline const char* kVarC = "T050";

}  // namespace pathway
