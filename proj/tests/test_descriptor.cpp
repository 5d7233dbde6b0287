#include <filesystem>
#include <fstream>
#include <string>

#include "doctest.h"
#include "uaelab/descriptor.hpp"

using namespace uaelab;

namespace {

const std::string kCorpusDir = UAELAB_CORPUS_DIR;

std::string write_temp(const std::string& name, const std::string& content) {
  const auto path = std::filesystem::temp_directory_path() / name;
  std::ofstream out(path);
  out << content;
  out.close();
  return path.string();
}

template <typename Fn>
void expect_throw_contains(Fn&& fn, const std::string& fragment) {
  try {
    fn();
    FAIL_CHECK("expected an exception mentioning '" << fragment << "'");
  } catch (const std::exception& e) {
    CHECK_MESSAGE(std::string(e.what()).find(fragment) != std::string::npos,
                  "message was: " << e.what());
  }
}

}  // namespace

TEST_CASE("layer kind names round-trip") {
  for (LayerKind k : {LayerKind::conv2d, LayerKind::depthwise_conv2d, LayerKind::relu,
                      LayerKind::elementwise_add, LayerKind::channel_attention_marker,
                      LayerKind::attention_marker, LayerKind::norm_marker}) {
    CHECK(layer_kind_from_name(layer_kind_name(k)) == k);
  }
  CHECK(layer_kind_from_name("add") == LayerKind::elementwise_add);
  CHECK_THROWS_AS(layer_kind_from_name("pool"), std::invalid_argument);
}

TEST_CASE("per-layer parameter counts") {
  LayerSpec conv{LayerKind::conv2d, 64, 64, 3, 3, true, -1};
  CHECK(count_layer_parameters(conv) == 36928);  // 3*3*64*64 + 64
  conv.has_bias = false;
  CHECK(count_layer_parameters(conv) == 36864);

  LayerSpec dw{LayerKind::depthwise_conv2d, 64, 64, 3, 3, true, -1};
  CHECK(count_layer_parameters(dw) == 640);  // 3*3*64 + 64

  LayerSpec act{LayerKind::relu, 0, 0, 0, 0, false, -1};
  CHECK(count_layer_parameters(act) == 0);

  LayerSpec marker{LayerKind::attention_marker, 0, 0, 0, 0, false, 1234};
  CHECK(count_layer_parameters(marker) == 1234);

  LayerSpec bad{LayerKind::conv2d, 0, 64, 3, 3, true, -1};
  CHECK_THROWS_AS(count_layer_parameters(bad), std::invalid_argument);
}

TEST_CASE("graph files of the reference corpus") {
  LayerGraph rb = load_layer_graph(kCorpusDir + "/rb.graph", 0, 64);
  CHECK(count_parameters(rb) == 73856);
  CHECK(count_forward_layers(rb) == 4);

  ModuleDescriptor rbd = derive_descriptor(rb, "RB");
  CHECK(rbd.k == 0);
  CHECK(rbd.n == 73856);
  CHECK(rbd.l == 4);
  CHECK(rbd.f == 64);

  LayerGraph ffn = load_layer_graph(kCorpusDir + "/convffn.graph", 1, 64);
  CHECK(count_parameters(ffn) == 17856);
  CHECK(count_forward_layers(ffn) == 6);

  LayerGraph dcrb_body = load_layer_graph(kCorpusDir + "/dcrb_body.graph", 1, 64);
  CHECK(count_parameters(dcrb_body) == 1280);

  LayerGraph crb = load_layer_graph(kCorpusDir + "/crb.graph", 0, 64);
  CHECK(count_forward_layers(crb) == 8);
  // The cycled forward sequence reuses the same two convolutions; the file
  // spells out both passes, so its naive parameter sum is double the body.
  CHECK(count_parameters(crb) == 2 * 73856);

  LayerGraph dcrb = load_layer_graph(kCorpusDir + "/dcrb.graph", 1, 64);
  CHECK(count_forward_layers(dcrb) == 8);
}

TEST_CASE("corpus file reproduces the built-in descriptors") {
  const auto loaded = load_corpus(kCorpusDir + "/golden.txt");
  const auto golden = golden_corpus();
  REQUIRE(loaded.size() == golden.size());
  for (std::size_t i = 0; i < golden.size(); ++i) {
    CAPTURE(golden[i].name);
    CHECK(loaded[i].name == golden[i].name);
    CHECK(loaded[i].k == golden[i].k);
    CHECK(loaded[i].n == golden[i].n);
    CHECK(loaded[i].l == golden[i].l);
    CHECK(loaded[i].f == golden[i].f);
  }
}

TEST_CASE("graph parser error paths carry file and line") {
  const std::string bad_tokens = write_temp("uaelab_bad_tokens.graph", "conv2d 64 64 3\n");
  expect_throw_contains([&] { load_layer_graph(bad_tokens, 0, 64); }, ":1:");

  const std::string bad_kind = write_temp("uaelab_bad_kind.graph", "maxpool 2 2 2 2 0\n");
  expect_throw_contains([&] { load_layer_graph(bad_kind, 0, 64); }, "unknown layer kind");

  const std::string bare_conv = write_temp("uaelab_bare_conv.graph", "conv2d\n");
  expect_throw_contains([&] { load_layer_graph(bare_conv, 0, 64); },
                        "requires all channel and kernel fields");

  const std::string non_numeric =
      write_temp("uaelab_non_numeric.graph", "conv2d a b c d e\n");
  expect_throw_contains([&] { load_layer_graph(non_numeric, 0, 64); }, "non-numeric");

  const std::string empty = write_temp("uaelab_empty.graph", "# only a comment\n");
  expect_throw_contains([&] { load_layer_graph(empty, 0, 64); }, "no layers");

  CHECK_THROWS_AS(load_layer_graph("/nonexistent/path.graph", 0, 64), std::runtime_error);

  // Marker lines may be bare and may carry a parameter annotation.
  const std::string marker =
      write_temp("uaelab_marker.graph", "attention_marker params=4096\nrelu\n");
  LayerGraph g = load_layer_graph(marker, 2, 64);
  CHECK(count_parameters(g) == 4096);
  CHECK(count_forward_layers(g) == 2);
}

TEST_CASE("corpus parser error paths") {
  const std::string dup = write_temp("uaelab_dup.txt",
                                     "name = A\nk = 0\nn = 100\nl = 1\nf = 64\n\n"
                                     "name = A\nk = 0\nn = 100\nl = 1\nf = 64\n");
  expect_throw_contains([&] { load_corpus(dup); }, "duplicate module name 'A'");

  const std::string unknown = write_temp("uaelab_unknown_field.txt",
                                         "name = A\nk = 0\nweird = 1\nn = 100\nl = 1\nf = 64\n");
  expect_throw_contains([&] { load_corpus(unknown); }, "unknown field 'weird'");

  const std::string orphan = write_temp("uaelab_orphan.txt", "k = 0\n");
  expect_throw_contains([&] { load_corpus(orphan); }, "before any 'name ='");

  const std::string missing = write_temp("uaelab_missing.txt", "name = A\nk = 0\nl = 1\nf = 64\n");
  expect_throw_contains([&] { load_corpus(missing); }, "field 'n': missing");

  const std::string bad_int =
      write_temp("uaelab_bad_int.txt", "name = A\nk = zero\nn = 100\nl = 1\nf = 64\n");
  expect_throw_contains([&] { load_corpus(bad_int); }, "not an integer");

  const std::string no_eq = write_temp("uaelab_no_eq.txt", "name A\n");
  expect_throw_contains([&] { load_corpus(no_eq); }, "expected 'key = value'");

  const std::string empty = write_temp("uaelab_empty_corpus.txt", "# nothing\n");
  expect_throw_contains([&] { load_corpus(empty); }, "defines no modules");

  CHECK_THROWS_AS(load_corpus("/nonexistent/corpus.txt"), std::runtime_error);
}

TEST_CASE("descriptor validation") {
  ModuleDescriptor d{"X", 0, 10, 1, 64};
  CHECK_NOTHROW(validate_descriptor(d));

  ModuleDescriptor bad = d;
  bad.k = -1;
  CHECK_THROWS_AS(validate_descriptor(bad), std::invalid_argument);
  bad = d;
  bad.n = -1;
  CHECK_THROWS_AS(validate_descriptor(bad), std::invalid_argument);
  bad = d;
  bad.l = 0;
  CHECK_THROWS_AS(validate_descriptor(bad), std::invalid_argument);
  bad = d;
  bad.f = 0;
  CHECK_THROWS_AS(validate_descriptor(bad), std::invalid_argument);
  bad = d;
  bad.name.clear();
  CHECK_THROWS_AS(validate_descriptor(bad), std::invalid_argument);

  LayerGraph empty;
  CHECK_THROWS_AS(derive_descriptor(empty, "E"), std::invalid_argument);
}
