#include "uaelab/descriptor.hpp"

#include <cctype>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <unordered_set>

namespace uaelab {

namespace {

bool kind_is_parametric(LayerKind kind) {
  return kind == LayerKind::conv2d || kind == LayerKind::depthwise_conv2d;
}

std::string trim(const std::string& s) {
  size_t a = s.find_first_not_of(" \t\r\n");
  if (a == std::string::npos) return "";
  size_t b = s.find_last_not_of(" \t\r\n");
  return s.substr(a, b - a + 1);
}

std::string strip_comment(const std::string& line) {
  size_t h = line.find('#');
  return h == std::string::npos ? line : line.substr(0, h);
}

}  // namespace

const char* layer_kind_name(LayerKind kind) {
  switch (kind) {
    case LayerKind::conv2d: return "conv2d";
    case LayerKind::depthwise_conv2d: return "depthwise_conv2d";
    case LayerKind::relu: return "relu";
    case LayerKind::elementwise_add: return "elementwise_add";
    case LayerKind::channel_attention_marker: return "channel_attention_marker";
    case LayerKind::attention_marker: return "attention_marker";
    case LayerKind::norm_marker: return "norm_marker";
  }
  return "unknown";
}

LayerKind layer_kind_from_name(const std::string& name) {
  if (name == "conv2d") return LayerKind::conv2d;
  if (name == "depthwise_conv2d") return LayerKind::depthwise_conv2d;
  if (name == "relu") return LayerKind::relu;
  if (name == "elementwise_add" || name == "add") return LayerKind::elementwise_add;
  if (name == "channel_attention_marker") return LayerKind::channel_attention_marker;
  if (name == "attention_marker") return LayerKind::attention_marker;
  if (name == "norm_marker") return LayerKind::norm_marker;
  throw std::invalid_argument("unknown layer kind: '" + name + "'");
}

std::int64_t count_layer_parameters(const LayerSpec& layer) {
  switch (layer.kind) {
    case LayerKind::conv2d: {
      if (layer.in_channels <= 0 || layer.out_channels <= 0 || layer.kernel_h <= 0 ||
          layer.kernel_w <= 0) {
        throw std::invalid_argument("conv2d layer requires positive channels and kernel size");
      }
      std::int64_t w = std::int64_t(layer.kernel_h) * layer.kernel_w * layer.in_channels *
                       layer.out_channels;
      return w + (layer.has_bias ? layer.out_channels : 0);
    }
    case LayerKind::depthwise_conv2d: {
      if (layer.in_channels <= 0 || layer.kernel_h <= 0 || layer.kernel_w <= 0) {
        throw std::invalid_argument(
            "depthwise_conv2d layer requires positive channels and kernel size");
      }
      std::int64_t w = std::int64_t(layer.kernel_h) * layer.kernel_w * layer.in_channels;
      return w + (layer.has_bias ? layer.in_channels : 0);
    }
    default:
      return layer.annotated_params > 0 ? layer.annotated_params : 0;
  }
}

std::int64_t count_parameters(const LayerGraph& graph) {
  std::int64_t total = 0;
  for (const auto& layer : graph.layers) total += count_layer_parameters(layer);
  return total;
}

int count_forward_layers(const LayerGraph& graph) {
  return static_cast<int>(graph.layers.size());
}

ModuleDescriptor derive_descriptor(const LayerGraph& graph, const std::string& name) {
  if (graph.layers.empty()) {
    throw std::invalid_argument("cannot derive a descriptor from an empty layer graph ('" +
                                name + "')");
  }
  ModuleDescriptor d;
  d.name = name;
  d.k = graph.nested_submodules;
  d.n = count_parameters(graph);
  d.l = count_forward_layers(graph);
  d.f = graph.feature_units;
  validate_descriptor(d);
  return d;
}

void validate_descriptor(const ModuleDescriptor& desc) {
  if (desc.name.empty()) throw std::invalid_argument("descriptor has an empty name");
  if (desc.k < 0)
    throw std::invalid_argument("descriptor '" + desc.name + "': k must be >= 0");
  if (desc.n < 0)
    throw std::invalid_argument("descriptor '" + desc.name + "': n must be >= 0");
  if (desc.l < 1)
    throw std::invalid_argument("descriptor '" + desc.name + "': l must be >= 1");
  if (desc.f < 1)
    throw std::invalid_argument("descriptor '" + desc.name + "': f must be >= 1");
}

LayerGraph load_layer_graph(const std::string& path, int nested_submodules,
                            int feature_units) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open graph file: " + path);
  LayerGraph graph;
  graph.nested_submodules = nested_submodules;
  graph.feature_units = feature_units;
  std::string raw;
  int line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    std::string line = trim(strip_comment(raw));
    if (line.empty()) continue;
    std::istringstream ss(line);
    std::vector<std::string> tok;
    std::string t;
    while (ss >> t) tok.push_back(t);

    LayerSpec layer;
    layer.kind = layer_kind_from_name(tok[0]);
    std::string annotation;
    if (!tok.empty() && tok.back().rfind("params=", 0) == 0) {
      annotation = tok.back().substr(7);
      tok.pop_back();
    }
    if (tok.size() != 1 && tok.size() != 6) {
      throw std::runtime_error(path + ":" + std::to_string(line_no) +
                               ": expected 'kind cin cout kh kw bias'");
    }
    if (tok.size() == 6) {
      try {
        layer.in_channels = std::stoi(tok[1]);
        layer.out_channels = std::stoi(tok[2]);
        layer.kernel_h = std::stoi(tok[3]);
        layer.kernel_w = std::stoi(tok[4]);
        layer.has_bias = std::stoi(tok[5]) != 0;
      } catch (const std::exception&) {
        throw std::runtime_error(path + ":" + std::to_string(line_no) +
                                 ": non-numeric layer field");
      }
    } else if (kind_is_parametric(layer.kind)) {
      throw std::runtime_error(path + ":" + std::to_string(line_no) + ": " + tok[0] +
                               " requires all channel and kernel fields");
    }
    if (!annotation.empty()) layer.annotated_params = std::stoll(annotation);
    graph.layers.push_back(layer);
  }
  if (graph.layers.empty()) throw std::runtime_error("graph file has no layers: " + path);
  return graph;
}

namespace {

struct RawRecord {
  std::string name, k, n, l, f;
  int first_line = 0;
};

ModuleDescriptor realize_record(const RawRecord& rec, const std::filesystem::path& base,
                                const std::string& corpus_path) {
  auto fail = [&](const std::string& field, const std::string& why) -> void {
    throw std::runtime_error(corpus_path + ": module '" + rec.name + "', field '" + field +
                             "': " + why);
  };
  if (rec.name.empty()) throw std::runtime_error(corpus_path + ": record without a name");
  if (rec.k.empty()) fail("k", "missing");
  if (rec.n.empty()) fail("n", "missing");
  if (rec.l.empty()) fail("l", "missing");
  if (rec.f.empty()) fail("f", "missing");

  int k = 0, f = 0;
  try {
    k = std::stoi(rec.k);
  } catch (const std::exception&) {
    fail("k", "not an integer: '" + rec.k + "'");
  }
  try {
    f = std::stoi(rec.f);
  } catch (const std::exception&) {
    fail("f", "not an integer: '" + rec.f + "'");
  }

  auto graph_of = [&](const std::string& value) {
    std::string file = trim(value.substr(6));
    if (file.empty()) throw std::runtime_error(corpus_path + ": empty graph reference");
    return load_layer_graph((base / file).string(), k, f);
  };

  ModuleDescriptor d;
  d.name = rec.name;
  d.k = k;
  d.f = f;
  if (rec.n.rfind("graph:", 0) == 0) {
    d.n = count_parameters(graph_of(rec.n));
  } else {
    try {
      d.n = std::stoll(rec.n);
    } catch (const std::exception&) {
      fail("n", "not an integer or graph reference: '" + rec.n + "'");
    }
  }
  if (rec.l.rfind("graph:", 0) == 0) {
    d.l = count_forward_layers(graph_of(rec.l));
  } else {
    try {
      d.l = std::stoi(rec.l);
    } catch (const std::exception&) {
      fail("l", "not an integer or graph reference: '" + rec.l + "'");
    }
  }
  try {
    validate_descriptor(d);
  } catch (const std::exception& e) {
    throw std::runtime_error(corpus_path + ": " + e.what());
  }
  return d;
}

}  // namespace

std::vector<ModuleDescriptor> load_corpus(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open corpus file: " + path);
  std::filesystem::path base = std::filesystem::path(path).parent_path();

  std::vector<ModuleDescriptor> out;
  std::unordered_set<std::string> seen;
  RawRecord rec;
  bool open_record = false;
  std::string raw;
  int line_no = 0;

  auto flush = [&]() {
    if (!open_record) return;
    ModuleDescriptor d = realize_record(rec, base, path);
    if (!seen.insert(d.name).second) {
      throw std::runtime_error(path + ": duplicate module name '" + d.name + "'");
    }
    out.push_back(d);
    rec = RawRecord{};
    open_record = false;
  };

  while (std::getline(in, raw)) {
    ++line_no;
    std::string line = trim(strip_comment(raw));
    if (line.empty()) {
      flush();
      continue;
    }
    size_t eq = line.find('=');
    if (eq == std::string::npos) {
      throw std::runtime_error(path + ":" + std::to_string(line_no) +
                               ": expected 'key = value'");
    }
    std::string key = trim(line.substr(0, eq));
    std::string value = trim(line.substr(eq + 1));
    if (key == "name") {
      flush();
      open_record = true;
      rec.name = value;
      rec.first_line = line_no;
    } else if (!open_record) {
      throw std::runtime_error(path + ":" + std::to_string(line_no) +
                               ": field '" + key + "' before any 'name ='");
    } else if (key == "k") {
      rec.k = value;
    } else if (key == "n") {
      rec.n = value;
    } else if (key == "l") {
      rec.l = value;
    } else if (key == "f") {
      rec.f = value;
    } else {
      throw std::runtime_error(path + ":" + std::to_string(line_no) + ": unknown field '" +
                               key + "'");
    }
  }
  flush();
  if (out.empty()) throw std::runtime_error(path + ": corpus file defines no modules");
  return out;
}

std::vector<ModuleDescriptor> golden_corpus() {
  return {
      {"RB", 0, 73856, 4, 64},      {"RCAB", 1, 148292, 15, 64},
      {"ConvFFN", 1, 17856, 6, 64}, {"RSTB", 3, 86784, 11, 64},
      {"GAL", 3, 56132, 21, 64},    {"DCRB", 1, 1280, 8, 64},
      {"CRB", 0, 73856, 8, 64},
  };
}

}  // namespace uaelab
