#pragma once

#include <cstdint>
#include <string>
#include <vector>

// Structural descriptors for network building blocks. A module is summarized by
// the tuple (k, n, l, f): nesting depth of sub-modules, trainable parameter
// count, forward propagation layer count, and input feature units. Descriptors
// are either written literally or derived from a layer graph.

namespace uaelab {

enum class LayerKind {
  conv2d,
  depthwise_conv2d,
  relu,
  elementwise_add,
  channel_attention_marker,
  attention_marker,
  norm_marker,
};

const char* layer_kind_name(LayerKind kind);
LayerKind layer_kind_from_name(const std::string& name);

struct LayerSpec {
  LayerKind kind = LayerKind::relu;
  int in_channels = 0;
  int out_channels = 0;
  int kernel_h = 0;
  int kernel_w = 0;
  bool has_bias = false;
  // explicit parameter override for marker kinds; -1 means "not annotated"
  std::int64_t annotated_params = -1;
};

struct LayerGraph {
  std::vector<LayerSpec> layers;
  int nested_submodules = 0;   // k
  int feature_units = 0;       // f
};

struct ModuleDescriptor {
  std::string name;
  int k = 0;            // nesting count, >= 0
  std::int64_t n = 0;   // trainable parameters, >= 0
  int l = 0;            // forward layers, >= 1
  int f = 0;            // input feature units, >= 1
};

// Trainable parameters of one layer: conv2d kh*kw*cin*cout (+cout bias),
// depthwise kh*kw*cin (+cin bias), everything else 0 unless annotated.
std::int64_t count_layer_parameters(const LayerSpec& layer);

std::int64_t count_parameters(const LayerGraph& graph);

// Every graph entry counts as one forward stage, activations and adds included.
int count_forward_layers(const LayerGraph& graph);

ModuleDescriptor derive_descriptor(const LayerGraph& graph, const std::string& name);

// Parses a graph file: one layer per line, "kind cin cout kh kw bias", with
// '#' comments; an optional trailing "params=N" annotates marker kinds.
LayerGraph load_layer_graph(const std::string& path, int nested_submodules, int feature_units);

// Parses a corpus file of blank-line separated key=value records
// (name, k, n or graph:FILE, l or graph:FILE, f). Graph paths are resolved
// relative to the corpus file.
std::vector<ModuleDescriptor> load_corpus(const std::string& path);

// The seven reference modules used throughout the tests and the CLI defaults.
std::vector<ModuleDescriptor> golden_corpus();

void validate_descriptor(const ModuleDescriptor& desc);

}  // namespace uaelab
