#include <doctest.h>

#include <fstream>

#include "hoaxnet/checkpoint.hpp"
#include "layer_checks.hpp"

using namespace hoaxnet;

namespace {

std::unique_ptr<Model> fresh(Architecture arch, Matrix<float>& table, std::uint64_t seed) {
  ModelSpec spec = ModelSpec::toy(arch);
  spec.vocab_size = 30;
  spec.title_len = 5;
  spec.body_len = 9;
  spec.max_len = 12;
  Rng rng(seed);
  table = Matrix<float>::Random(spec.vocab_size, spec.embedding_dim);
  table.row(0).setZero();
  return build_model(spec, &table, rng);
}

std::vector<char> bytes_of(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

}  // namespace

TEST_CASE("save, load and evaluate is bit-identical") {
  testing::TempDir dir("ckpt");
  for (auto arch : {Architecture::lstm, Architecture::cnn, Architecture::transformer}) {
    CAPTURE(architecture_name(arch));
    Matrix<float> table;
    auto model = fresh(arch, table, 5);
    Rng rng(2);
    const auto batch = testing::random_articles(7, 5, 9, 12, 30, rng);
    const Matrix<float> before = model->forward(batch).value();

    CheckpointMeta meta;
    meta.fields["note"] = "x";
    for (int i = 0; i < 30; ++i) meta.vocab.push_back("tok" + std::to_string(i));
    const auto path = dir / "m.bin";
    save_checkpoint(path, *model, meta);
    const auto loaded = load_checkpoint(path);
    const Matrix<float> after = loaded.model->forward(batch).value();
    CHECK(before.cwiseEqual(after).all());
    CHECK(loaded.meta.fields.at("note") == "x");
    CHECK(loaded.meta.vocab == meta.vocab);
    CHECK(loaded.model->spec().architecture == arch);

    const auto again = dir / "m2.bin";
    save_checkpoint(again, *loaded.model, loaded.meta);
    CHECK(bytes_of(path) == bytes_of(again));
  }
}

TEST_CASE("corrupt checkpoints are rejected") {
  testing::TempDir dir("ckpt-bad");
  Matrix<float> table;
  auto model = fresh(Architecture::cnn, table, 1);
  const auto path = dir / "m.bin";
  save_checkpoint(path, *model, {});
  const auto good = bytes_of(path);

  auto write = [&](const std::vector<char>& b) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    out.write(b.data(), static_cast<std::streamsize>(b.size()));
  };
  auto magic = good;
  magic[0] = 'X';
  write(magic);
  CHECK_THROWS_AS(load_checkpoint(path), DataError);

  write(std::vector<char>(good.begin(), good.end() - 5));
  CHECK_THROWS_AS(load_checkpoint(path), DataError);

  auto version = good;
  version[8] = 9;
  write(version);
  CHECK_THROWS_AS(load_checkpoint(path), DataError);

  CHECK_THROWS_AS(load_checkpoint(dir / "missing.bin"), DataError);
}

TEST_CASE("spec fields round trip") {
  const auto spec = ModelSpec::full_scale_cnn();
  ModelSpec copy;
  for (const auto& [k, v] : spec_fields(spec)) apply_spec_field(copy, k, v);
  CHECK(spec_fields(copy) == spec_fields(spec));
  CHECK_THROWS(apply_spec_field(copy, "no_such_field", "1"));
  CHECK_THROWS(apply_spec_field(copy, "title_len", "abc"));
}
