#include "bev/serial.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace bev {

namespace {

using nlohmann::json;

json camera_to_json_obj(const CameraModel& cam) {
  return json{
      {"name", cam.name},
      {"fx", cam.intrinsics.fx},
      {"fy", cam.intrinsics.fy},
      {"cx", cam.intrinsics.cx},
      {"cy", cam.intrinsics.cy},
      {"width", cam.intrinsics.width},
      {"height", cam.intrinsics.height},
      {"rotation", {cam.extrinsics.rotation.w, cam.extrinsics.rotation.x,
                    cam.extrinsics.rotation.y, cam.extrinsics.rotation.z}},
      {"translation", {cam.extrinsics.translation.x, cam.extrinsics.translation.y,
                       cam.extrinsics.translation.z}},
  };
}

CameraModel camera_from_json_obj(const json& j) {
  CameraModel cam;
  cam.name = j.at("name").get<std::string>();
  cam.intrinsics.fx = j.at("fx").get<double>();
  cam.intrinsics.fy = j.at("fy").get<double>();
  cam.intrinsics.cx = j.at("cx").get<double>();
  cam.intrinsics.cy = j.at("cy").get<double>();
  cam.intrinsics.width = j.at("width").get<int>();
  cam.intrinsics.height = j.at("height").get<int>();
  const auto& r = j.at("rotation");
  Quaternion q{r.at(0).get<double>(), r.at(1).get<double>(), r.at(2).get<double>(),
               r.at(3).get<double>()};
  if (std::abs(q.norm() - 1.0) > 1e-6) {
    throw std::invalid_argument("camera '" + cam.name + "': rotation is not a unit quaternion");
  }
  cam.extrinsics.rotation = q.normalized();
  const auto& t = j.at("translation");
  cam.extrinsics.translation = {t.at(0).get<double>(), t.at(1).get<double>(),
                                t.at(2).get<double>()};
  return cam;
}

json rig_to_json_obj(const CameraRig& rig) {
  json cams = json::array();
  for (const auto& cam : rig.cameras) cams.push_back(camera_to_json_obj(cam));
  return json{{"cameras", cams}};
}

CameraRig rig_from_json_obj(const json& j) {
  CameraRig rig;
  for (const auto& c : j.at("cameras")) rig.cameras.push_back(camera_from_json_obj(c));
  rig.validate();
  return rig;
}

}  // namespace

std::string rig_to_json(const CameraRig& rig) { return rig_to_json_obj(rig).dump(2) + "\n"; }

CameraRig rig_from_json(const std::string& text) {
  return rig_from_json_obj(json::parse(text));
}

std::string scene_to_json(const Scene& scene) {
  json objs = json::array();
  for (const auto& o : scene.objects) {
    objs.push_back(json{
        {"class_id", o.class_id},
        {"center", {o.center.x, o.center.y, o.center.z}},
        {"dims", {o.length, o.width, o.height}},
        {"yaw", o.yaw},
    });
  }
  const json j{
      {"seed", scene.seed},
      {"road", {{"x_min", scene.road.x_min}, {"x_max", scene.road.x_max},
                {"y_min", scene.road.y_min}, {"y_max", scene.road.y_max}}},
      {"objects", objs},
      {"rig", rig_to_json_obj(scene.rig)},
  };
  return j.dump(2) + "\n";
}

Scene scene_from_json(const std::string& text) {
  const json j = json::parse(text);
  Scene scene;
  scene.seed = j.at("seed").get<std::uint64_t>();
  const auto& r = j.at("road");
  scene.road = {r.at("x_min").get<double>(), r.at("x_max").get<double>(),
                r.at("y_min").get<double>(), r.at("y_max").get<double>()};
  for (const auto& o : j.at("objects")) {
    SceneObject obj;
    obj.class_id = o.at("class_id").get<int>();
    const auto& c = o.at("center");
    obj.center = {c.at(0).get<double>(), c.at(1).get<double>(), c.at(2).get<double>()};
    const auto& d = o.at("dims");
    obj.length = d.at(0).get<double>();
    obj.width = d.at(1).get<double>();
    obj.height = d.at(2).get<double>();
    obj.yaw = o.at("yaw").get<double>();
    if (!(obj.length > 0.0) || !(obj.width > 0.0) || !(obj.height > 0.0)) {
      throw std::invalid_argument("scene object has non-positive dimensions");
    }
    if (std::abs(obj.center.z - obj.height / 2) > 1e-9) {
      throw std::invalid_argument("scene object does not rest on the ground (center z != height/2)");
    }
    scene.objects.push_back(obj);
  }
  scene.rig = rig_from_json_obj(j.at("rig"));
  return scene;
}

std::string detections_to_json(std::span<const Detection2D> detections) {
  json arr = json::array();
  for (const auto& d : detections) {
    arr.push_back(json{
        {"camera", d.camera_name},
        {"bbox", {d.u_min, d.v_min, d.u_max, d.v_max}},
        {"class_id", d.class_id},
        {"confidence", d.confidence},
    });
  }
  return arr.dump(2) + "\n";
}

std::vector<Detection2D> detections_from_json(const std::string& text) {
  std::vector<Detection2D> out;
  for (const auto& j : json::parse(text)) {
    Detection2D d;
    d.camera_name = j.at("camera").get<std::string>();
    const auto& b = j.at("bbox");
    d.u_min = b.at(0).get<double>();
    d.v_min = b.at(1).get<double>();
    d.u_max = b.at(2).get<double>();
    d.v_max = b.at(3).get<double>();
    d.class_id = j.at("class_id").get<int>();
    d.confidence = j.at("confidence").get<double>();
    if (!(d.u_min < d.u_max) || !(d.v_min < d.v_max)) {
      throw std::invalid_argument("detection bbox is empty");
    }
    out.push_back(std::move(d));
  }
  return out;
}

std::string objects_to_json(std::span<const BevObject> objects) {
  json arr = json::array();
  for (const auto& o : objects) {
    arr.push_back(json{
        {"x", o.x}, {"y", o.y}, {"yaw", o.yaw},
        {"length", o.length}, {"width", o.width},
        {"class_id", o.class_id}, {"confidence", o.confidence},
    });
  }
  return arr.dump(2) + "\n";
}

std::vector<BevObject> objects_from_json(const std::string& text) {
  std::vector<BevObject> out;
  for (const auto& j : json::parse(text)) {
    BevObject o;
    o.x = j.at("x").get<double>();
    o.y = j.at("y").get<double>();
    o.yaw = j.at("yaw").get<double>();
    o.length = j.at("length").get<double>();
    o.width = j.at("width").get<double>();
    o.class_id = j.at("class_id").get<int>();
    o.confidence = j.at("confidence").get<double>();
    if (!(o.length > 0.0) || !(o.width > 0.0)) {
      throw std::invalid_argument("BEV object has a non-positive footprint");
    }
    if (!(o.confidence >= 0.0 && o.confidence <= 1.0)) {
      throw std::invalid_argument("BEV object confidence outside [0, 1]");
    }
    out.push_back(o);
  }
  return out;
}

namespace {

std::string format_value(double v) {
  // Shortest representation that round-trips, matching the JSON emitter.
  return json(v).dump();
}

}  // namespace

std::string metrics_to_csv(const MetricsReport& report) {
  std::ostringstream out;
  out << "metric,class,threshold,value\n";
  for (const auto& [cls_id, v] : report.seg_iou_pct) {
    out << "seg_iou," << class_name(cls_id) << ",," << format_value(v) << "\n";
  }
  for (const auto& [cls_id, per_thr] : report.ap_pct) {
    for (const auto& [thr, v] : per_thr) {
      out << "ap," << class_name(cls_id) << ",0." << thr << "," << format_value(v) << "\n";
    }
  }
  if (report.mean_position_error_m) {
    out << "position_error,all,," << format_value(*report.mean_position_error_m) << "\n";
  }
  for (const auto& [cls_id, v] : report.recall_pct) {
    out << "recall," << class_name(cls_id) << ",," << format_value(v) << "\n";
  }
  return out.str();
}

std::string metrics_to_json(const MetricsReport& report) {
  json j;
  for (const auto& [cls_id, v] : report.seg_iou_pct) j["seg_iou"][class_name(cls_id)] = v;
  for (const auto& [cls_id, per_thr] : report.ap_pct) {
    for (const auto& [thr, v] : per_thr) {
      j["ap"][class_name(cls_id)]["0." + std::to_string(thr)] = v;
    }
  }
  if (report.mean_position_error_m) j["position_error_m"] = *report.mean_position_error_m;
  for (const auto& [cls_id, v] : report.recall_pct) j["recall"][class_name(cls_id)] = v;
  return j.dump(2) + "\n";
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open file: " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open file for writing: " + path.string());
  out << text;
  if (!out) throw std::runtime_error("short write: " + path.string());
}

}  // namespace bev
