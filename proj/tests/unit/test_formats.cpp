#include <catch2/catch_amalgamated.hpp>

#include <cstdio>

#include "trn/checkpoint.hpp"

using namespace trn;

namespace {

TrnConfig cfg_for_formats() {
  TrnConfig cfg;
  cfg.feature_dim = 3;
  cfg.num_actions = 2;
  cfg.hidden_dim = 4;
  cfg.decoder_steps = 2;
  cfg.sequence_len = 8;
  cfg.alpha = 0.75;
  cfg.score_embed_dim = 3;
  return cfg;
}

}  // namespace

TEST_CASE("checkpoint round trip for every model kind") {
  TrnConfig cfg = cfg_for_formats();
  for (ModelKind kind : {ModelKind::trn, ModelKind::lstm, ModelKind::ed,
                         ModelKind::framewise, ModelKind::rnn_offline}) {
    INFO("model " << to_string(kind));
    Rng rng(2024);
    AnyModel<float> m = AnyModel<float>::init(kind, cfg, rng);
    std::string bytes = serialize_checkpoint(m);
    AnyModel<float> back = parse_checkpoint<float>(bytes);
    CHECK(back.kind() == kind);
    CHECK(back.config().hidden_dim == cfg.hidden_dim);
    CHECK(back.config().alpha == cfg.alpha);
    // byte-exact re-serialization
    CHECK(serialize_checkpoint(back) == bytes);
    auto ba = m.blocks(), bb = back.blocks();
    REQUIRE(ba.size() == bb.size());
    for (std::size_t i = 0; i < ba.size(); ++i) {
      CHECK(ba[i].name == bb[i].name);
      for (std::size_t k = 0; k < ba[i].size(); ++k) CHECK(ba[i].data[k] == bb[i].data[k]);
    }
  }
}

TEST_CASE("checkpoint survives an f64 round trip through f32 storage") {
  TrnConfig cfg = cfg_for_formats();
  Rng rng(31);
  AnyModel<double> m = AnyModel<double>::init(ModelKind::trn, cfg, rng);
  std::string bytes = serialize_checkpoint(m);
  AnyModel<double> back = parse_checkpoint<double>(bytes);
  // values pass through f32, so the second serialization is byte-exact
  CHECK(serialize_checkpoint(back) == bytes);
}

TEST_CASE("checkpoint corruption yields format errors, never crashes") {
  TrnConfig cfg = cfg_for_formats();
  Rng rng(8);
  AnyModel<float> m = AnyModel<float>::init(ModelKind::ed, cfg, rng);
  std::string bytes = serialize_checkpoint(m);

  SECTION("bad magic") {
    std::string bad = bytes;
    bad[0] = 'X';
    CHECK_THROWS_AS(parse_checkpoint<float>(bad), FormatError);
    CHECK_THROWS_WITH(parse_checkpoint<float>(bad),
                      Catch::Matchers::ContainsSubstring("TRN1"));
  }
  SECTION("bad version") {
    std::string bad = bytes;
    bad[4] = 9;
    CHECK_THROWS_AS(parse_checkpoint<float>(bad), FormatError);
  }
  SECTION("truncations at many offsets") {
    for (std::size_t cut : {std::size_t(2), std::size_t(7), std::size_t(20),
                            bytes.size() / 3, bytes.size() - 2}) {
      CHECK_THROWS_AS(parse_checkpoint<float>(bytes.substr(0, cut)), FormatError);
    }
  }
  SECTION("trailing bytes") {
    CHECK_THROWS_AS(parse_checkpoint<float>(bytes + "xx"), FormatError);
  }
  SECTION("unknown model kind") {
    std::string bad = bytes;
    bad[8] = 42;
    CHECK_THROWS_AS(parse_checkpoint<float>(bad), FormatError);
  }
}

TEST_CASE("checkpoint file save/load") {
  TrnConfig cfg = cfg_for_formats();
  Rng rng(77);
  AnyModel<float> m = AnyModel<float>::init(ModelKind::lstm, cfg, rng);
  const char* path = "test_ckpt.trn1";
  save_checkpoint(m, path);
  AnyModel<float> back = load_checkpoint<float>(path);
  CHECK(serialize_checkpoint(back) == serialize_checkpoint(m));
  std::remove(path);
  CHECK_THROWS_AS(load_checkpoint<float>("does_not_exist.trn1"), FormatError);
}
