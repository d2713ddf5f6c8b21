#include "sonovis/data/scene.hpp"

#include <cmath>

namespace sonovis::data {

namespace {
constexpr double kPi = 3.14159265358979323846;

// Nearest covering object for the pixel, or nullptr.
const SceneObject* hit_object(const Scene& scene, double u, double v) {
    const SceneObject* best = nullptr;
    for (const auto& obj : scene.objects) {
        bool covered;
        if (obj.shape == ObjectShape::Rect) {
            covered = std::abs(u - obj.u) <= obj.size && std::abs(v - obj.v) <= obj.size;
        } else {
            const double du = u - obj.u, dv = v - obj.v;
            covered = du * du + dv * dv <= obj.size * obj.size;
        }
        if (covered && (best == nullptr || obj.distance < best->distance)) best = &obj;
    }
    return best;
}

}  // namespace

void Scene::validate() const {
    require(mics.size() >= 2, ErrorCode::InvalidInput, "scene: need at least 2 microphones");
    require(background_depth > 0, ErrorCode::InvalidInput, "scene: background depth must be positive");
    for (const auto& obj : objects) {
        require(obj.distance > 0, ErrorCode::InvalidInput, "scene: object distance must be positive");
        require(obj.u >= 0 && obj.u <= 1 && obj.v >= 0 && obj.v <= 1, ErrorCode::InvalidInput,
                "scene: object center outside the frame");
        require(obj.class_id >= 1, ErrorCode::InvalidInput, "scene: class id 0 is background");
    }
}

std::array<double, 3> Scene::object_position(const SceneObject& obj) const {
    const double half_fov = 0.5 * fov_deg * kPi / 180.0;
    const double azimuth = (obj.u - 0.5) * 2.0 * half_fov * 0.5;
    const double elevation = (0.5 - obj.v) * 2.0 * half_fov * 0.5;
    // Direction on the unit sphere, scaled to the object distance.
    const double x = std::sin(azimuth) * std::cos(elevation);
    const double y = std::sin(elevation);
    const double z = std::cos(azimuth) * std::cos(elevation);
    return {obj.distance * x, obj.distance * y, obj.distance * z};
}

Tensor render_depth(const Scene& scene, int size) {
    scene.validate();
    require(size > 0, ErrorCode::InvalidInput, "render: size must be positive");
    Tensor depth({1, size, size});
    for (int y = 0; y < size; ++y) {
        const double v = (y + 0.5) / size;
        for (int x = 0; x < size; ++x) {
            const double u = (x + 0.5) / size;
            const SceneObject* obj = hit_object(scene, u, v);
            depth.at3(0, y, x) = static_cast<float>(obj ? obj->distance : scene.background_depth);
        }
    }
    return depth;
}

metrics::ClassMap render_seg(const Scene& scene, int size) {
    scene.validate();
    require(size > 0, ErrorCode::InvalidInput, "render: size must be positive");
    metrics::ClassMap seg;
    seg.height = seg.width = size;
    seg.ids.resize(static_cast<size_t>(size) * size, 0);
    for (int y = 0; y < size; ++y) {
        const double v = (y + 0.5) / size;
        for (int x = 0; x < size; ++x) {
            const double u = (x + 0.5) / size;
            const SceneObject* obj = hit_object(scene, u, v);
            seg.ids[static_cast<size_t>(y) * size + x] = obj ? obj->class_id : 0;
        }
    }
    return seg;
}

}  // namespace sonovis::data
