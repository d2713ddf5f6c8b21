#include "sonovis/data/manifest.hpp"

#include <json.hpp>

#include <cmath>
#include <fstream>
#include <map>
#include <set>

namespace sonovis::data {

using nlohmann::json;
namespace fs = std::filesystem;

std::string to_string(Modality m) { return m == Modality::Depth ? "depth" : "segmentation"; }
std::string to_string(Split s) {
    switch (s) {
        case Split::Train: return "train";
        case Split::Val: return "val";
        case Split::Test: return "test";
    }
    return "?";
}

Modality modality_from_string(const std::string& s) {
    if (s == "depth") return Modality::Depth;
    if (s == "segmentation") return Modality::Segmentation;
    fail(ErrorCode::InvalidInput, "unknown modality: " + s);
}

Split split_from_string(const std::string& s) {
    if (s == "train") return Split::Train;
    if (s == "val") return Split::Val;
    if (s == "test") return Split::Test;
    fail(ErrorCode::InvalidInput, "unknown split: " + s);
}

std::vector<const ManifestEntry*> PairManifest::select(Modality m, Split s) const {
    std::vector<const ManifestEntry*> out;
    for (const auto& e : entries)
        if (e.modality == m && e.split == s) out.push_back(&e);
    return out;
}

PairManifest load_manifest(const fs::path& path) {
    std::ifstream in(path);
    require(in.good(), ErrorCode::MissingInput, "cannot open manifest: " + path.string());

    PairManifest manifest;
    manifest.root = path.parent_path();

    std::string line;
    require(static_cast<bool>(std::getline(in, line)), ErrorCode::InvalidInput,
            "manifest is empty: " + path.string());
    json header = json::parse(line);
    require(header.value("type", "") == "header", ErrorCode::InvalidInput,
            "manifest must start with a header line");
    manifest.depth_min = header.at("depth_min").get<double>();
    manifest.depth_max = header.at("depth_max").get<double>();
    manifest.depth_convention = header.value("depth_convention", "larger-is-farther");
    manifest.audio_channels = header.value("audio_channels", 0);
    manifest.image_size = header.value("image_size", 0);
    require(std::isfinite(manifest.depth_min) && std::isfinite(manifest.depth_max) &&
                manifest.depth_min < manifest.depth_max,
            ErrorCode::InvalidInput, "manifest: depth bounds must be finite with min < max");
    for (const auto& c : header.value("classes", json::array())) {
        ClassInfo info;
        info.id = c.at("id").get<int>();
        info.name = c.value("name", "class" + std::to_string(info.id));
        if (c.contains("color")) {
            auto rgb = c.at("color").get<std::vector<int>>();
            require(rgb.size() == 3, ErrorCode::InvalidInput, "manifest: color must be [r,g,b]");
            info.color = {static_cast<uint8_t>(rgb[0]), static_cast<uint8_t>(rgb[1]),
                          static_cast<uint8_t>(rgb[2])};
        }
        manifest.classes.push_back(info);
    }

    int line_no = 1;
    // split membership is keyed by (visual, modality); audio files are shared
    // between the depth and segmentation entries of the same scene
    std::map<std::string, Split> seen;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        json j = json::parse(line);
        require(j.value("type", "entry") == "entry", ErrorCode::InvalidInput,
                "manifest line " + std::to_string(line_no) + ": unexpected record type");
        ManifestEntry e;
        e.audio_path = j.at("audio").get<std::string>();
        e.visual_path = j.at("visual").get<std::string>();
        e.modality = modality_from_string(j.at("modality").get<std::string>());
        e.split = split_from_string(j.at("split").get<std::string>());

        require(fs::exists(manifest.root / e.audio_path), ErrorCode::MissingInput,
                "manifest line " + std::to_string(line_no) + ": dangling audio path " + e.audio_path);
        require(fs::exists(manifest.root / e.visual_path), ErrorCode::MissingInput,
                "manifest line " + std::to_string(line_no) + ": dangling visual path " + e.visual_path);

        const std::string key = e.visual_path + "#" + to_string(e.modality);
        auto [it, inserted] = seen.emplace(key, e.split);
        require(inserted || it->second == e.split, ErrorCode::InvalidInput,
                "manifest line " + std::to_string(line_no) + ": " + e.visual_path +
                    " appears in more than one split");
        require(inserted, ErrorCode::InvalidInput,
                "manifest line " + std::to_string(line_no) + ": duplicate entry " + e.visual_path);
        manifest.entries.push_back(std::move(e));
    }
    return manifest;
}

void save_manifest(const fs::path& path, const PairManifest& manifest) {
    std::ofstream out(path);
    require(out.good(), ErrorCode::Runtime, "cannot open for write: " + path.string());

    json classes = json::array();
    for (const auto& c : manifest.classes)
        classes.push_back({{"id", c.id},
                           {"name", c.name},
                           {"color", {c.color[0], c.color[1], c.color[2]}}});
    json header = {{"type", "header"},
                   {"depth_min", manifest.depth_min},
                   {"depth_max", manifest.depth_max},
                   {"depth_convention", manifest.depth_convention},
                   {"audio_channels", manifest.audio_channels},
                   {"image_size", manifest.image_size},
                   {"classes", classes}};
    out << header.dump() << "\n";
    for (const auto& e : manifest.entries) {
        json j = {{"type", "entry"},
                  {"audio", e.audio_path},
                  {"visual", e.visual_path},
                  {"modality", to_string(e.modality)},
                  {"split", to_string(e.split)}};
        out << j.dump() << "\n";
    }
    require(out.good(), ErrorCode::Runtime, "manifest write failed: " + path.string());
}

}  // namespace sonovis::data
