#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "walsh/stats.hpp"

namespace walsh {

// FNV-1a 64-bit content hash, hex encoded.
std::uint64_t fnv1a64(std::string_view bytes);
std::string fnv1a64_hex(std::string_view bytes);

// Collects output files for one experiment run and writes a manifest listing
// every file with its content hash. Files are recorded in insertion order.
class ArtifactWriter {
  public:
    explicit ArtifactWriter(std::filesystem::path dir);

    // Writes `content` under the output directory and records it.
    void add(const std::string& name, const std::string& content);
    void add_json(const std::string& name, const nlohmann::ordered_json& j);

    // Writes manifest.json (itself not listed) and returns the manifest.
    nlohmann::ordered_json finish();

    const std::filesystem::path& dir() const { return dir_; }

  private:
    std::filesystem::path dir_;
    nlohmann::ordered_json entries_ = nlohmann::ordered_json::array();
};

std::string histogram_csv(const Histogram& h);

std::string read_text_file(const std::filesystem::path& p);

}  // namespace walsh
