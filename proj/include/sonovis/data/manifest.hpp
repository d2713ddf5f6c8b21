#pragma once

#include <array>
#include <filesystem>
#include <string>
#include <vector>

#include "sonovis/core/error.hpp"

namespace sonovis::data {

enum class Modality { Depth, Segmentation };
enum class Split { Train, Val, Test };

std::string to_string(Modality m);
std::string to_string(Split s);
Modality modality_from_string(const std::string& s);
Split split_from_string(const std::string& s);

struct ClassInfo {
    int id = 0;
    std::string name;
    std::array<uint8_t, 3> color{0, 0, 0};
};

struct ManifestEntry {
    std::string audio_path;   // relative to the manifest directory
    std::string visual_path;  // relative to the manifest directory
    Modality modality = Modality::Depth;
    Split split = Split::Train;
};

// JSON Lines file: a header object on the first line (normalization bounds,
// class palette, depth convention), one entry object per subsequent line.
struct PairManifest {
    std::filesystem::path root;  // directory containing the manifest file
    std::vector<ManifestEntry> entries;
    double depth_min = 0.0;  // meters
    double depth_max = 1.0;
    std::string depth_convention = "larger-is-farther";
    std::vector<ClassInfo> classes;  // includes background (id 0)
    int audio_channels = 0;
    int image_size = 0;

    std::vector<const ManifestEntry*> select(Modality m, Split s) const;
    int num_classes() const { return static_cast<int>(classes.size()); }

    double denormalize_depth(double v01) const {
        return depth_min + v01 * (depth_max - depth_min);
    }
    double normalize_depth(double meters) const {
        return (meters - depth_min) / (depth_max - depth_min);
    }
};

PairManifest load_manifest(const std::filesystem::path& path);
void save_manifest(const std::filesystem::path& path, const PairManifest& manifest);

}  // namespace sonovis::data
