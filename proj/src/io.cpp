#include "walsh/io.hpp"

#include <fstream>
#include <sstream>

#include "walsh/errors.hpp"

namespace walsh {

std::uint64_t fnv1a64(std::string_view bytes) {
    std::uint64_t h = 0xCBF29CE484222325ull;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001B3ull;
    }
    return h;
}

std::string fnv1a64_hex(std::string_view bytes) {
    static const char* digits = "0123456789abcdef";
    std::uint64_t h = fnv1a64(bytes);
    std::string out(16, '0');
    for (int i = 15; i >= 0; --i) {
        out[static_cast<std::size_t>(i)] = digits[h & 0xF];
        h >>= 4;
    }
    return out;
}

ArtifactWriter::ArtifactWriter(std::filesystem::path dir) : dir_(std::move(dir)) {
    std::filesystem::create_directories(dir_);
}

void ArtifactWriter::add(const std::string& name, const std::string& content) {
    std::ofstream f(dir_ / name, std::ios::binary);
    if (!f) throw ArgumentError("cannot open output file: " + (dir_ / name).string());
    f << content;
    entries_.push_back({{"file", name}, {"bytes", content.size()}, {"fnv1a64", fnv1a64_hex(content)}});
}

void ArtifactWriter::add_json(const std::string& name, const nlohmann::ordered_json& j) {
    add(name, j.dump(2) + "\n");
}

nlohmann::ordered_json ArtifactWriter::finish() {
    nlohmann::ordered_json manifest;
    manifest["files"] = entries_;
    std::ofstream f(dir_ / "manifest.json", std::ios::binary);
    f << manifest.dump(2) << "\n";
    return manifest;
}

std::string histogram_csv(const Histogram& h) {
    std::ostringstream os;
    os.precision(17);
    os << "bin_left,bin_right,count\n";
    for (std::size_t i = 0; i + 1 < h.edges.size(); ++i)
        os << h.edges[i] << ',' << h.edges[i + 1] << ',' << h.counts[i] << '\n';
    return os.str();
}

std::string read_text_file(const std::filesystem::path& p) {
    std::ifstream f(p, std::ios::binary);
    if (!f) throw ArgumentError("cannot read file: " + p.string());
    std::ostringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

}  // namespace walsh
