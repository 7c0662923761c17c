#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "pathway/detect.hpp"

namespace pathway {

// Rect-grid heatmap; NaN / negative (for integer modes) cells are grey.
void svg_heatmap(const std::filesystem::path& path,
                 const std::vector<std::vector<double>>& rows, const std::string& title,
                 const std::string& xlabel = "", const std::string& ylabel = "");

// Forced (red) and baseline (blue) member series over time, with vertical
// shading where the significance flag is increase (red) or decrease (blue).
void svg_timeline(const std::filesystem::path& path,
                  const std::vector<std::vector<double>>& forced,
                  const std::vector<std::vector<double>>& baseline,
                  const std::vector<SigFlag>& flags, const std::string& title);

// Partition map: active partitions red, footprint (optional) outlined.
void svg_map(const std::filesystem::path& path, const std::vector<std::uint8_t>& active,
             std::size_t nrow, std::size_t ncol, const std::string& title,
             const std::vector<std::uint8_t>* footprint = nullptr);

}  // namespace pathway
