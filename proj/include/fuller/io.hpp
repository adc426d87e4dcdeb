#pragma once

#include <string>
#include <vector>

#include "fuller/models.hpp"

namespace fuller {

// A model file: the space plus the metric data living on it.
struct ModelFile {
  ModelSpace model;
  std::vector<Bump> bumps;
  double scale = 1.0;

  MetricSpec metric() const { return standard_metric(model, bumps, scale); }
};

// JSON text, e.g. {"kind": "flat_torus", "basis": [[1,0],[0,1]], "bumps": [...]}.
// Unknown keys are rejected with InvalidInput.
ModelFile parse_model(const std::string& json_text);
ModelFile load_model(const std::string& path);
std::string dump_model(const ModelFile& file);

std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& text);

}  // namespace fuller
