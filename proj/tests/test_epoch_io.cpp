#include <doctest.h>

#include <filesystem>

#include "fzp300/epoch_io.hpp"
#include "fzp300/rng.hpp"
#include "fzp300/synth.hpp"

using namespace fzp300;

namespace {

EpochSet random_epochs(std::uint64_t seed, std::size_t n_trials = 5,
                       std::size_t channels = 3, std::size_t samples = 16) {
  EpochSet x;
  x.n_channels = channels;
  x.n_samples = samples;
  x.sample_rate_hz = 32.0;
  x.t0_s = -0.5 * static_cast<double>(samples) / 32.0;
  x.meta = {Cohort::AUT, 9, 2};
  Rng rng(seed);
  for (std::size_t t = 0; t < n_trials; ++t) {
    Matrix trial(channels, samples);
    // Values representable in f32 so encode/decode is lossless.
    for (double& v : trial.values()) v = static_cast<float>(rng.normal());
    x.trials.push_back(std::move(trial));
    x.labels.push_back(t % 2);
  }
  return x;
}

std::filesystem::path temp_file(const char* name) {
  return std::filesystem::temp_directory_path() / name;
}

}  // namespace

TEST_CASE("EPO1 round-trip is bit-exact on re-encode") {
  const EpochSet x = random_epochs(17);
  const std::vector<std::uint8_t> first = encode_epochs(x);
  const EpochSet loaded = decode_epochs(first);
  const std::vector<std::uint8_t> second = encode_epochs(loaded);
  CHECK(first == second);
  CHECK(loaded.n_trials() == x.n_trials());
  CHECK(loaded.labels == x.labels);
  CHECK(loaded.meta.cohort == Cohort::AUT);
  CHECK(loaded.meta.subject == 9);
  CHECK(loaded.meta.session == 2);
}

TEST_CASE("EPO1 file save/load round-trip") {
  const EpochSet x = random_epochs(23);
  const auto path = temp_file("fzp300_roundtrip.epo");
  save_epochs(x, path);
  const EpochSet loaded = load_epochs(path);
  CHECK(encode_epochs(loaded) == encode_epochs(x));
  std::filesystem::remove(path);
}

TEST_CASE("property: random epoch sets survive the byte round-trip") {
  for (std::uint64_t seed = 0; seed < 12; ++seed) {
    Rng shape_rng(seed * 7919 + 1);
    const std::size_t trials = 2 + shape_rng.below(6);
    const std::size_t channels = 1 + shape_rng.below(5);
    const std::size_t samples = 4 + shape_rng.below(40);
    const EpochSet x = random_epochs(seed, trials, channels, samples);
    const auto bytes = encode_epochs(x);
    CHECK(encode_epochs(decode_epochs(bytes)) == bytes);
  }
}

TEST_CASE("bad magic fails at offset 0") {
  auto bytes = encode_epochs(random_epochs(3));
  bytes[0] = 'X';
  bytes[1] = 'X';
  try {
    decode_epochs(bytes);
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    CHECK(e.byte_offset() == 0);
  }
}

TEST_CASE("truncated payload names expected and actual sizes") {
  const EpochSet x = random_epochs(4, 3);
  auto bytes = encode_epochs(x);
  // Declared 3 trials, keep payload for 2.
  const std::size_t one_trial = x.n_channels * x.n_samples * 4;
  bytes.resize(bytes.size() - one_trial);
  try {
    decode_epochs(bytes);
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    CHECK(std::string(e.what()).find("need") != std::string::npos);
    CHECK(std::string(e.what()).find("have") != std::string::npos);
  }
}

TEST_CASE("trailing garbage is a length mismatch") {
  auto bytes = encode_epochs(random_epochs(5));
  bytes.push_back(0);
  CHECK_THROWS_WITH_AS(decode_epochs(bytes), doctest::Contains("length mismatch"),
                       ParseError);
}

TEST_CASE("missing file is an IO error") {
  CHECK_THROWS_AS(load_epochs("/nonexistent/path/file.epo"), IoError);
}

TEST_CASE("manifest round-trip resolves relative paths") {
  const auto dir = std::filesystem::temp_directory_path() / "fzp300_manifest_test";
  std::filesystem::create_directories(dir);
  const std::vector<ManifestEntry> entries = {{"a.epo", "SYN", 1, 0},
                                              {"sub/b.epo", "NT", 2, 1}};
  save_manifest(entries, dir / "manifest.json");
  const auto loaded = load_manifest(dir / "manifest.json");
  REQUIRE(loaded.size() == 2);
  CHECK(loaded[0].path == (dir / "a.epo").string());
  CHECK(loaded[1].cohort == "NT");
  CHECK(loaded[1].subject == 2);
  std::filesystem::remove_all(dir);
}
