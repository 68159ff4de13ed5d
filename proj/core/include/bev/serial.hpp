#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "bev/metrics.hpp"
#include "bev/object_bev.hpp"
#include "bev/scene.hpp"

namespace bev {

// JSON schemas. All emit/parse pairs round-trip exactly (doubles are written
// with shortest round-trip precision).

std::string rig_to_json(const CameraRig& rig);
CameraRig rig_from_json(const std::string& text);

std::string scene_to_json(const Scene& scene);
Scene scene_from_json(const std::string& text);

std::string detections_to_json(std::span<const Detection2D> detections);
std::vector<Detection2D> detections_from_json(const std::string& text);

std::string objects_to_json(std::span<const BevObject> objects);
std::vector<BevObject> objects_from_json(const std::string& text);

// metric,class,threshold,value rows; undefined metrics are omitted.
std::string metrics_to_csv(const MetricsReport& report);
std::string metrics_to_json(const MetricsReport& report);

std::string read_text_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, const std::string& text);

}  // namespace bev
