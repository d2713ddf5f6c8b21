#pragma once

#include <array>
#include <vector>

#include "sonovis/core/tensor.hpp"
#include "sonovis/metrics/segmentation.hpp"

namespace sonovis::data {

enum class ObjectShape { Rect, Disc };

// Object layout in normalized image coordinates; distance in meters along
// the camera ray through the object center.
struct SceneObject {
    int class_id = 1;  // 0 is reserved for background
    ObjectShape shape = ObjectShape::Rect;
    double u = 0.5, v = 0.5;  // center, [0,1] x [0,1]
    double size = 0.2;        // half-extent (rect) or radius (disc), [0,1] units
    double distance = 4.0;    // meters, > 0
    bool emits_sound = true;
    double frequency = 440.0;  // Hz, class-characteristic fundamental
};

struct Scene {
    std::vector<SceneObject> objects;
    std::vector<std::array<double, 3>> mics;  // world positions, camera at origin
    double background_depth = 12.0;           // meters
    double fov_deg = 90.0;

    void validate() const;
    // Camera-frame world point of an object center (x right, y up, z forward).
    std::array<double, 3> object_position(const SceneObject& obj) const;
};

// Painter's rasterization: per pixel the nearest covering object wins.
// Depth values are meters; pixels uncovered by any object take
// background_depth.
Tensor render_depth(const Scene& scene, int size);
metrics::ClassMap render_seg(const Scene& scene, int size);

}  // namespace sonovis::data
