// Copyright 2026 The bevkit Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "bevkit/io.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <charconv>
#include <cstring>
#include <fstream>
#include <sstream>

#include "json.hpp"

#include "bevkit/error.hpp"

namespace bevkit
{

namespace fs = std::filesystem;
using nlohmann::json;

namespace
{

static_assert(std::endian::native == std::endian::little, "tensor files are little-endian; add byte swapping");

constexpr std::array<char, 8> kMagic{'B', 'E', 'V', 'K', 'T', 'N', 'S', 'R'};

struct TensorFile
{
  json header;
  std::vector<float> values;
  std::vector<std::int32_t> ints;
};

json grid_to_json(const VoxelGridSpec & g)
{
  return json{{"nx", g.nx}, {"ny", g.ny}, {"nz", g.nz}, {"dx", g.dx}, {"dy", g.dy}, {"dz", g.dz},
    {"origin", {g.origin.x(), g.origin.y(), g.origin.z()}}};
}

VoxelGridSpec grid_from_json(const json & j)
{
  VoxelGridSpec g;
  g.nx = j.at("nx").get<int>();
  g.ny = j.at("ny").get<int>();
  g.nz = j.at("nz").get<int>();
  g.dx = j.at("dx").get<double>();
  g.dy = j.at("dy").get<double>();
  g.dz = j.at("dz").get<double>();
  const auto origin = j.at("origin").get<std::vector<double>>();
  require(origin.size() == 3, ErrorCode::kMalformedInput, "grid origin needs 3 values");
  g.origin = {origin[0], origin[1], origin[2]};
  g.validate();
  return g;
}

void write_tensor(const fs::path & path, json header, const std::vector<float> & values,
  const std::vector<std::int32_t> * ints = nullptr)
{
  header["dtype"] = "float32";
  header["order"] = "row-major";
  const std::string text = header.dump();
  std::ofstream out(path, std::ios::binary);
  require(static_cast<bool>(out), ErrorCode::kIo, "cannot open " + path.string() + " for writing");
  const std::uint64_t len = text.size();
  out.write(kMagic.data(), kMagic.size());
  out.write(reinterpret_cast<const char *>(&len), sizeof(len));
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  out.write(reinterpret_cast<const char *>(values.data()), static_cast<std::streamsize>(values.size() * sizeof(float)));
  if (ints != nullptr) {
    out.write(reinterpret_cast<const char *>(ints->data()),
      static_cast<std::streamsize>(ints->size() * sizeof(std::int32_t)));
  }
  require(static_cast<bool>(out), ErrorCode::kIo, "failed writing " + path.string());
}

std::size_t product(const std::vector<std::int64_t> & dims)
{
  std::size_t n = 1;
  for (auto d : dims) {
    require(d > 0, ErrorCode::kMalformedInput, "tensor dimensions must be positive");
    n *= static_cast<std::size_t>(d);
  }
  return n;
}

TensorFile read_tensor(const fs::path & path, std::string_view expected_kind)
{
  require(fs::exists(path), ErrorCode::kFileNotFound, "no such file: " + path.string());
  std::ifstream in(path, std::ios::binary);
  require(static_cast<bool>(in), ErrorCode::kIo, "cannot open " + path.string());
  std::array<char, 8> magic{};
  std::uint64_t len = 0;
  in.read(magic.data(), magic.size());
  in.read(reinterpret_cast<char *>(&len), sizeof(len));
  require(in && magic == kMagic, ErrorCode::kMalformedInput, path.string() + " is not a bevkit tensor file");
  require(len < (1U << 24), ErrorCode::kMalformedInput, path.string() + ": header too large");
  std::string text(len, '\0');
  in.read(text.data(), static_cast<std::streamsize>(len));
  require(static_cast<bool>(in), ErrorCode::kMalformedInput, path.string() + ": truncated header");

  TensorFile file;
  try {
    file.header = json::parse(text);
    require(file.header.at("kind").get<std::string>() == expected_kind, ErrorCode::kMalformedInput,
      path.string() + ": expected a " + std::string(expected_kind) + " tensor");
    require(file.header.at("dtype").get<std::string>() == "float32", ErrorCode::kMalformedInput,
      path.string() + ": only float32 is supported");
    const std::size_t count = product(file.header.at("dims").get<std::vector<std::int64_t>>());
    file.values.resize(count);
    in.read(reinterpret_cast<char *>(file.values.data()), static_cast<std::streamsize>(count * sizeof(float)));
    require(static_cast<bool>(in), ErrorCode::kMalformedInput, path.string() + ": truncated data");
    if (file.header.value("hit_count", false)) {
      const auto dims = file.header.at("dims").get<std::vector<std::int64_t>>();
      require(dims.size() == 4, ErrorCode::kMalformedInput, path.string() + ": hit counts need a 4D tensor");
      file.ints.resize(count / static_cast<std::size_t>(dims[3]));
      in.read(reinterpret_cast<char *>(file.ints.data()),
        static_cast<std::streamsize>(file.ints.size() * sizeof(std::int32_t)));
      require(static_cast<bool>(in), ErrorCode::kMalformedInput, path.string() + ": truncated hit counts");
    }
  } catch (const json::exception & e) {
    fail(ErrorCode::kMalformedInput, path.string() + ": " + e.what());
  }
  return file;
}

double parse_double(std::string_view field, std::size_t line)
{
  // Trim surrounding whitespace.
  while (!field.empty() && (field.front() == ' ' || field.front() == '\t')) {
    field.remove_prefix(1);
  }
  while (!field.empty() && (field.back() == ' ' || field.back() == '\t' || field.back() == '\r')) {
    field.remove_suffix(1);
  }
  if (!field.empty() && field.front() == '+') {
    field.remove_prefix(1);
  }
  double value = 0.0;
  const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), value);
  require(ec == std::errc{} && ptr == field.data() + field.size(), ErrorCode::kMalformedInput,
    "line " + std::to_string(line) + ": cannot parse number '" + std::string(field) + "'");
  return value;
}

std::vector<std::string_view> split(std::string_view line, char sep)
{
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t pos = line.find(sep, start);
    if (pos == std::string_view::npos) {
      out.push_back(line.substr(start));
      return out;
    }
    out.push_back(line.substr(start, pos - start));
    start = pos + 1;
  }
}

}  // namespace

std::string format_double(double value)
{
  std::array<char, 64> buf{};
  const auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), value);
  return std::string(buf.data(), ptr);
}

std::string read_text_file(const fs::path & path)
{
  require(fs::exists(path), ErrorCode::kFileNotFound, "no such file: " + path.string());
  std::ifstream in(path, std::ios::binary);
  require(static_cast<bool>(in), ErrorCode::kIo, "cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text_file(const fs::path & path, std::string_view text)
{
  std::ofstream out(path, std::ios::binary);
  require(static_cast<bool>(out), ErrorCode::kIo, "cannot open " + path.string() + " for writing");
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  require(static_cast<bool>(out), ErrorCode::kIo, "failed writing " + path.string());
}

CameraRig parse_rig_json(std::string_view text)
{
  json root;
  try {
    root = json::parse(text);
  } catch (const json::exception & e) {
    fail(ErrorCode::kMalformedInput, std::string("rig JSON: ") + e.what());
  }
  require(root.is_object() && root.contains("cameras") && root["cameras"].is_array(), ErrorCode::kMalformedInput,
    "rig JSON needs a 'cameras' array");
  std::vector<Camera> cameras;
  std::size_t index = 0;
  for (const json & c : root["cameras"]) {
    try {
      Camera cam;
      cam.intrinsics.fx = c.at("fx").get<double>();
      cam.intrinsics.fy = c.at("fy").get<double>();
      cam.intrinsics.cx = c.at("cx").get<double>();
      cam.intrinsics.cy = c.at("cy").get<double>();
      cam.intrinsics.width = c.at("width").get<int>();
      cam.intrinsics.height = c.at("height").get<int>();
      const auto r = c.at("rotation").get<std::vector<double>>();
      const auto t = c.at("translation").get<std::vector<double>>();
      require(r.size() == 9, ErrorCode::kMalformedInput, "rotation needs 9 values");
      require(t.size() == 3, ErrorCode::kMalformedInput, "translation needs 3 values");
      for (int row = 0; row < 3; ++row) {
        for (int col = 0; col < 3; ++col) {
          cam.extrinsics.rotation(row, col) = r[static_cast<std::size_t>(row * 3 + col)];
        }
      }
      cam.extrinsics.translation = {t[0], t[1], t[2]};
      cam.intrinsics.validate();
      cam.extrinsics.validate();
      cameras.push_back(cam);
    } catch (const json::exception & e) {
      fail(ErrorCode::kMalformedInput, "camera " + std::to_string(index) + ": " + e.what());
    } catch (const Error & e) {
      fail(ErrorCode::kMalformedInput, "camera " + std::to_string(index) + ": " + e.what());
    }
    ++index;
  }
  try {
    return CameraRig(std::move(cameras));
  } catch (const Error & e) {
    fail(ErrorCode::kMalformedInput, e.what());
  }
}

std::string rig_to_json(const CameraRig & rig)
{
  json cams = json::array();
  for (const Camera & cam : rig.cameras()) {
    std::vector<double> r;
    for (int row = 0; row < 3; ++row) {
      for (int col = 0; col < 3; ++col) {
        r.push_back(cam.extrinsics.rotation(row, col));
      }
    }
    const Eigen::Vector3d & t = cam.extrinsics.translation;
    cams.push_back(json{{"fx", cam.intrinsics.fx}, {"fy", cam.intrinsics.fy}, {"cx", cam.intrinsics.cx},
      {"cy", cam.intrinsics.cy}, {"width", cam.intrinsics.width}, {"height", cam.intrinsics.height},
      {"rotation", r}, {"translation", {t.x(), t.y(), t.z()}}});
  }
  return json{{"cameras", cams}}.dump(2) + "\n";
}

CameraRig load_rig(const fs::path & path) { return parse_rig_json(read_text_file(path)); }

void save_rig(const fs::path & path, const CameraRig & rig) { write_text_file(path, rig_to_json(rig)); }

void save_feature_image(const fs::path & path, const FeatureImage & image)
{
  image.validate();
  json header{{"kind", "feature"}, {"dims", {image.height, image.width, image.channels}},
    {"camera_index", image.camera_index}};
  write_tensor(path, header, image.data);
}

FeatureImage load_feature_image(const fs::path & path)
{
  TensorFile file = read_tensor(path, "feature");
  const auto dims = file.header.at("dims").get<std::vector<std::int64_t>>();
  require(dims.size() == 3, ErrorCode::kMalformedInput, path.string() + ": feature tensors are 3D");
  FeatureImage img;
  img.camera_index = file.header.value("camera_index", std::size_t{0});
  img.height = static_cast<int>(dims[0]);
  img.width = static_cast<int>(dims[1]);
  img.channels = static_cast<int>(dims[2]);
  img.data = std::move(file.values);
  return img;
}

std::vector<FeatureImage> load_feature_dir(const fs::path & dir)
{
  require(fs::is_directory(dir), ErrorCode::kFileNotFound, "no such directory: " + dir.string());
  std::vector<fs::path> files;
  for (const auto & entry : fs::directory_iterator(dir)) {
    if (entry.is_regular_file() && entry.path().extension() == ".bin") {
      files.push_back(entry.path());
    }
  }
  std::sort(files.begin(), files.end());
  std::vector<FeatureImage> images;
  for (const auto & f : files) {
    images.push_back(load_feature_image(f));
  }
  std::stable_sort(images.begin(), images.end(),
    [](const FeatureImage & a, const FeatureImage & b) { return a.camera_index < b.camera_index; });
  return images;
}

void save_voxel_grid(const fs::path & path, const VoxelGrid & grid)
{
  json header{{"kind", "voxel"}, {"dims", {grid.spec.nx, grid.spec.ny, grid.spec.nz, grid.channels}},
    {"grid", grid_to_json(grid.spec)}, {"hit_count", true}};
  write_tensor(path, header, grid.data, &grid.hit_count);
}

VoxelGrid load_voxel_grid(const fs::path & path)
{
  TensorFile file = read_tensor(path, "voxel");
  VoxelGridSpec spec;
  std::vector<std::int64_t> dims;
  try {
    spec = grid_from_json(file.header.at("grid"));
    dims = file.header.at("dims").get<std::vector<std::int64_t>>();
  } catch (const json::exception & e) {
    fail(ErrorCode::kMalformedInput, path.string() + ": " + e.what());
  }
  require(dims.size() == 4 && dims[0] == spec.nx && dims[1] == spec.ny && dims[2] == spec.nz,
    ErrorCode::kMalformedInput, path.string() + ": dims disagree with grid");
  VoxelGrid grid(spec, static_cast<int>(dims[3]));
  grid.data = std::move(file.values);
  if (!file.ints.empty()) {
    grid.hit_count = std::move(file.ints);
  }
  return grid;
}

void save_bev_grid(const fs::path & path, const BevGrid & grid, const VoxelGridSpec * spec)
{
  json header{{"kind", "bev"}, {"dims", {grid.nx, grid.ny, grid.channels}}};
  if (spec != nullptr) {
    header["grid"] = grid_to_json(*spec);
  }
  write_tensor(path, header, grid.data);
}

BevGrid load_bev_grid(const fs::path & path, VoxelGridSpec * spec)
{
  TensorFile file = read_tensor(path, "bev");
  const auto dims = file.header.at("dims").get<std::vector<std::int64_t>>();
  require(dims.size() == 3, ErrorCode::kMalformedInput, path.string() + ": BEV tensors are 3D");
  BevGrid grid;
  grid.nx = static_cast<int>(dims[0]);
  grid.ny = static_cast<int>(dims[1]);
  grid.channels = static_cast<int>(dims[2]);
  grid.data = std::move(file.values);
  if (spec != nullptr) {
    require(file.header.contains("grid"), ErrorCode::kMalformedInput, path.string() + ": missing grid metadata");
    try {
      *spec = grid_from_json(file.header.at("grid"));
    } catch (const json::exception & e) {
      fail(ErrorCode::kMalformedInput, path.string() + ": " + e.what());
    }
  }
  return grid;
}

void save_matrix(const fs::path & path, const std::vector<double> & values, std::size_t rows, std::size_t cols)
{
  require(values.size() == rows * cols && rows > 0 && cols > 0, ErrorCode::kShapeMismatch,
    "matrix size does not match its shape");
  std::vector<float> data(values.begin(), values.end());
  write_tensor(path, json{{"kind", "tensor"}, {"dims", {rows, cols}}}, data);
}

std::vector<double> load_matrix(const fs::path & path, std::size_t & rows, std::size_t & cols)
{
  TensorFile file = read_tensor(path, "tensor");
  const auto dims = file.header.at("dims").get<std::vector<std::int64_t>>();
  require(dims.size() == 2, ErrorCode::kMalformedInput, path.string() + ": expected a 2D tensor");
  rows = static_cast<std::size_t>(dims[0]);
  cols = static_cast<std::size_t>(dims[1]);
  return {file.values.begin(), file.values.end()};
}

std::string boxes_to_csv(const std::vector<Box3D> & boxes)
{
  std::string out = "class_id,score,x,y,z,w,l,h,theta,vx,vy\n";
  for (const Box3D & b : boxes) {
    out += std::to_string(b.class_id);
    for (double v : {b.score, b.x, b.y, b.z, b.w, b.l, b.h, b.theta, b.vx, b.vy}) {
      out += ',';
      out += format_double(v);
    }
    out += '\n';
  }
  return out;
}

std::vector<Box3D> parse_boxes_csv(std::string_view text)
{
  std::vector<Box3D> boxes;
  std::size_t line_no = 0;
  std::size_t start = 0;
  while (start <= text.size()) {
    std::size_t end = text.find('\n', start);
    if (end == std::string_view::npos) {
      end = text.size();
    }
    std::string_view line = text.substr(start, end - start);
    start = end + 1;
    ++line_no;
    if (!line.empty() && line.back() == '\r') {
      line.remove_suffix(1);
    }
    if (line.empty() || line.front() == '#') {
      if (end == text.size()) {
        break;
      }
      continue;
    }
    if (line_no == 1 && line.starts_with("class_id")) {
      continue;
    }
    const auto fields = split(line, ',');
    require(fields.size() == 11, ErrorCode::kMalformedInput,
      "line " + std::to_string(line_no) + ": expected 11 box fields, got " + std::to_string(fields.size()));
    std::array<double, 11> v{};
    for (std::size_t k = 0; k < 11; ++k) {
      v[k] = parse_double(fields[k], line_no);
    }
    Box3D b;
    b.class_id = static_cast<int>(v[0]);
    require(static_cast<double>(b.class_id) == v[0], ErrorCode::kMalformedInput,
      "line " + std::to_string(line_no) + ": class_id must be an integer");
    b.score = v[1];
    b.x = v[2];
    b.y = v[3];
    b.z = v[4];
    b.w = v[5];
    b.l = v[6];
    b.h = v[7];
    b.theta = normalize_angle(v[8]);
    b.vx = v[9];
    b.vy = v[10];
    try {
      validate_box(b);
    } catch (const Error & e) {
      fail(ErrorCode::kMalformedInput, "line " + std::to_string(line_no) + ": " + e.what());
    }
    boxes.push_back(b);
    if (end == text.size()) {
      break;
    }
  }
  return boxes;
}

void save_boxes(const fs::path & path, const std::vector<Box3D> & boxes)
{
  write_text_file(path, boxes_to_csv(boxes));
}

std::vector<Box3D> load_boxes(const fs::path & path)
{
  try {
    return parse_boxes_csv(read_text_file(path));
  } catch (const Error & e) {
    if (e.code() == ErrorCode::kMalformedInput) {
      fail(e.code(), path.string() + ": " + e.what());
    }
    throw;
  }
}

std::string assignment_to_csv(const AssignmentResult & result, std::size_t num_anchors)
{
  std::string out = "anchor_index,label,gt_index\n";
  const auto labels = result.labels(num_anchors);
  for (std::size_t a = 0; a < labels.size(); ++a) {
    const char * name = labels[a].first == AnchorLabel::kPositive  ? "pos"
                        : labels[a].first == AnchorLabel::kIgnored ? "ign"
                                                                   : "neg";
    out += std::to_string(a) + "," + name + "," + std::to_string(labels[a].second) + "\n";
  }
  return out;
}

void save_scene(const fs::path & dir, const SyntheticScene & scene)
{
  std::error_code ec;
  fs::create_directories(dir / "features", ec);
  require(!ec, ErrorCode::kIo, "cannot create " + (dir / "features").string() + ": " + ec.message());
  save_rig(dir / "rig.json", scene.rig);
  save_boxes(dir / "gt_boxes.csv", scene.gt_boxes);
  json header{{"kind", "bev"}, {"dims", {scene.map_mask.nx, scene.map_mask.ny, scene.map_mask.channels}},
    {"grid", grid_to_json(scene.grid)}, {"ground_z", scene.ground_z}, {"seed", scene.seed},
    {"channels", {"drivable", "lane"}}};
  write_tensor(dir / "map.bin", header, scene.map_mask.data);
  for (const FeatureImage & img : scene.feature_images) {
    save_feature_image(dir / "features" / ("cam" + std::to_string(img.camera_index) + ".bin"), img);
  }
}

SyntheticScene load_scene(const fs::path & dir)
{
  require(fs::is_directory(dir), ErrorCode::kFileNotFound, "no such scene directory: " + dir.string());
  SyntheticScene scene;
  scene.rig = load_rig(dir / "rig.json");
  scene.gt_boxes = load_boxes(dir / "gt_boxes.csv");
  TensorFile map = read_tensor(dir / "map.bin", "bev");
  try {
    scene.grid = grid_from_json(map.header.at("grid"));
    scene.ground_z = map.header.value("ground_z", scene.grid.origin.z() + 0.5 * scene.grid.dz);
    scene.seed = map.header.value("seed", std::uint64_t{0});
    const auto dims = map.header.at("dims").get<std::vector<std::int64_t>>();
    require(dims.size() == 3 && dims[0] == scene.grid.nx && dims[1] == scene.grid.ny && dims[2] == 2,
      ErrorCode::kMalformedInput, "map.bin: expected nx x ny x 2");
  } catch (const json::exception & e) {
    fail(ErrorCode::kMalformedInput, "map.bin: " + std::string(e.what()));
  }
  scene.map_mask.nx = scene.grid.nx;
  scene.map_mask.ny = scene.grid.ny;
  scene.map_mask.channels = 2;
  scene.map_mask.data = std::move(map.values);
  scene.feature_images = load_feature_dir(dir / "features");
  require(scene.feature_images.size() == scene.rig.size(), ErrorCode::kShapeMismatch,
    "scene has " + std::to_string(scene.rig.size()) + " cameras but " +
      std::to_string(scene.feature_images.size()) + " feature images");
  return scene;
}

}  // namespace bevkit
