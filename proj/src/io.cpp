#include "fuller/io.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

namespace fuller {

using nlohmann::json;

namespace {

void allow_keys(const json& j, std::initializer_list<const char*> keys) {
  const std::set<std::string> ok(keys.begin(), keys.end());
  for (const auto& [k, v] : j.items())
    if (!ok.count(k)) fail(ErrorKind::InvalidInput, "unknown key '" + k + "' in model of kind " + j.value("kind", "?"));
}

Mat matrix_of(const json& j) {
  if (!j.is_array() || j.empty()) fail(ErrorKind::InvalidInput, "expected a non-empty matrix");
  const auto rows = static_cast<Eigen::Index>(j.size());
  const auto cols = static_cast<Eigen::Index>(j[0].size());
  Mat m(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r) {
    if (static_cast<Eigen::Index>(j[static_cast<std::size_t>(r)].size()) != cols)
      fail(ErrorKind::InvalidInput, "ragged matrix");
    for (Eigen::Index c = 0; c < cols; ++c) m(r, c) = j[static_cast<std::size_t>(r)][static_cast<std::size_t>(c)].get<double>();
  }
  return m;
}

json matrix_json(const Mat& m) {
  json out = json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    json row = json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    out.push_back(row);
  }
  return out;
}

std::vector<Bump> bumps_of(const json& j) {
  std::vector<Bump> out;
  for (const auto& b : j) {
    allow_keys(b, {"center", "radius", "amplitude"});
    Bump bump;
    const auto c = b.at("center").get<std::vector<double>>();
    bump.center = Eigen::Map<const Vec>(c.data(), static_cast<Eigen::Index>(c.size()));
    bump.radius = b.at("radius").get<double>();
    bump.amplitude = b.at("amplitude").get<double>();
    out.push_back(bump);
  }
  return out;
}

ModelSpace model_of(const json& j, std::vector<Bump>& bumps, double& scale) {
  const std::string kind = j.at("kind").get<std::string>();
  if (j.contains("bumps")) bumps = bumps_of(j.at("bumps"));
  if (j.contains("scale")) scale = j.at("scale").get<double>();
  if (kind == "flat_torus") {
    allow_keys(j, {"kind", "basis", "bumps", "scale"});
    return ModelSpace::flat_torus(matrix_of(j.at("basis")));
  }
  if (kind == "circle") {
    allow_keys(j, {"kind", "length", "bumps", "scale"});
    return ModelSpace::circle(j.value("length", 1.0));
  }
  if (kind == "fuchsian") {
    allow_keys(j, {"kind", "genus", "generators", "bumps", "scale"});
    const int genus = j.at("genus").get<int>();
    if (!j.contains("generators")) return ModelSpace::fuchsian(regular_polygon_group(genus));
    FuchsianGroup g;
    g.genus = genus;
    for (const auto& m : j.at("generators")) {
      const Mat a = matrix_of(m);
      if (a.rows() != 2 || a.cols() != 2) fail(ErrorKind::InvalidInput, "Fuchsian generators are 2x2");
      g.generators.push_back(a);
    }
    return ModelSpace::fuchsian(g);
  }
  if (kind == "warped_cylinder") {
    allow_keys(j, {"kind", "profile", "kappa", "delta", "center", "window", "bumps", "scale"});
    WarpProfile w;
    const std::string p = j.value("profile", "cosh");
    if (p == "cosh") {
      w.kind = WarpKind::Cosh;
    } else if (p == "flattening") {
      w.kind = WarpKind::Flattening;
    } else if (p == "adversarial") {
      w.kind = WarpKind::Adversarial;
      w.kappa = j.value("kappa", 2.0);
      w.delta = j.value("delta", 0.5);
      w.center = j.value("center", 2.0);
    } else {
      fail(ErrorKind::InvalidInput, "unknown warp profile '" + p + "'");
    }
    return ModelSpace::warped_cylinder(w, j.value("window", 10.0));
  }
  if (kind == "product") {
    allow_keys(j, {"kind", "factors", "bumps", "scale"});
    const json& f = j.at("factors");
    if (f.size() != 2) fail(ErrorKind::InvalidInput, "a product has two factors");
    std::vector<Bump> ignored;
    double s = 1.0;
    ModelSpace fiber = model_of(f[0], ignored, s);
    ModelSpace base = model_of(f[1], ignored, s);
    return ModelSpace::product(std::move(fiber), std::move(base));
  }
  if (kind == "mapping_torus") {
    allow_keys(j, {"kind", "fiber", "holonomy"});
    std::vector<Bump> ignored;
    double s = 1.0;
    ModelSpace fiber = model_of(j.at("fiber"), ignored, s);
    const json& h = j.at("holonomy");
    ClassMap map;
    if (h.contains("matrix")) {
      const Mat m = matrix_of(h.at("matrix"));
      map = lattice_map(m.array().round().cast<int>().matrix());
    } else {
      std::vector<Word> images, inverse_images;
      for (const auto& w : h.at("images")) images.push_back(parse_word(w.get<std::string>()));
      for (const auto& w : h.at("inverse_images")) inverse_images.push_back(parse_word(w.get<std::string>()));
      map = substitution_map(images, inverse_images);
    }
    return ModelSpace::mapping_torus(std::move(fiber), std::move(map));
  }
  fail(ErrorKind::InvalidInput, "unknown model kind '" + kind + "'");
}

json model_json(const ModelSpace& m) {
  json j;
  switch (m.kind) {
    case ModelKind::FlatTorus:
      j["kind"] = "flat_torus";
      j["basis"] = matrix_json(m.basis);
      break;
    case ModelKind::FuchsianSurface: {
      j["kind"] = "fuchsian";
      j["genus"] = m.group.genus;
      json gens = json::array();
      for (const auto& g : m.group.generators) gens.push_back(matrix_json(g));
      j["generators"] = gens;
      break;
    }
    case ModelKind::WarpedCylinder:
      j["kind"] = "warped_cylinder";
      j["profile"] = m.warp.kind == WarpKind::Cosh ? "cosh" : m.warp.kind == WarpKind::Flattening ? "flattening" : "adversarial";
      if (m.warp.kind == WarpKind::Adversarial) {
        j["kappa"] = m.warp.kappa;
        j["delta"] = m.warp.delta;
        j["center"] = m.warp.center;
      }
      j["window"] = m.window;
      break;
    case ModelKind::Product:
      j["kind"] = "product";
      j["factors"] = json::array({model_json(m.factors[0]), model_json(m.factors[1])});
      break;
    case ModelKind::MappingTorus: {
      j["kind"] = "mapping_torus";
      j["fiber"] = model_json(m.factors[0]);
      json h;
      if (m.holonomy.is_substitution()) {
        json im = json::array(), inv = json::array();
        for (const auto& w : m.holonomy.images) im.push_back(word_to_string(w));
        for (const auto& w : m.holonomy.inverse_images) inv.push_back(word_to_string(w));
        h["images"] = im;
        h["inverse_images"] = inv;
      } else {
        h["matrix"] = matrix_json(m.holonomy.matrix.cast<double>());
      }
      j["holonomy"] = h;
      break;
    }
  }
  return j;
}

}  // namespace

ModelFile parse_model(const std::string& json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::exception& e) {
    fail(ErrorKind::InvalidInput, std::string("model file is not valid JSON: ") + e.what());
  }
  ModelFile f;
  try {
    f.model = model_of(j, f.bumps, f.scale);
  } catch (const json::exception& e) {
    fail(ErrorKind::InvalidInput, std::string("malformed model: ") + e.what());
  }
  return f;
}

ModelFile load_model(const std::string& path) { return parse_model(read_text_file(path)); }

std::string dump_model(const ModelFile& file) {
  json j = model_json(file.model);
  if (!file.bumps.empty()) {
    json bs = json::array();
    for (const Bump& b : file.bumps)
      bs.push_back({{"center", std::vector<double>(b.center.data(), b.center.data() + b.center.size())},
                    {"radius", b.radius},
                    {"amplitude", b.amplitude}});
    j["bumps"] = bs;
  }
  if (file.scale != 1.0) j["scale"] = file.scale;
  return j.dump(2);
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorKind::InvalidInput, "cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) fail(ErrorKind::InvalidInput, "cannot write '" + path + "'");
  out << text;
}

}  // namespace fuller
