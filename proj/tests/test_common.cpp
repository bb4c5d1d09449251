#include <doctest.h>

#include <set>

#include "socsim/common.hpp"
#include "socsim/document.hpp"
#include "support.hpp"

using namespace socsim;

TEST_CASE("tokenize matches the reference tokenizer on random text") {
  tsupport::Gen g(1);
  for (int i = 0; i < 500; ++i) {
    const auto t = g.text(0, 15);
    CHECK(tokenize(t) == tsupport::ref_tokenize(t));
  }
  CHECK(tokenize("Don't STOP-me now, café_2!") == std::vector<std::string>{"don", "t", "stop", "me", "now", "café_2"});
  CHECK(tokenize("").empty());
  CHECK(tokenize("... !!").empty());
}

TEST_CASE("rng draws are reproducible and in range") {
  Rng a(99), b(99);
  for (int i = 0; i < 1000; ++i) {
    const auto x = a.below(7);
    CHECK(x == b.below(7));
    CHECK(x < 7);
    const double u = a.uniform();
    b.uniform();
    CHECK(u >= 0.0);
    CHECK(u < 1.0);
  }
}

TEST_CASE("derive_seed separates components") {
  std::set<std::uint64_t> seen;
  for (std::uint64_t e = 0; e < 50; ++e)
    for (const char* id : {"a", "b", "c"}) seen.insert(derive_seed(7, {fnv1a64(id), e}));
  CHECK(seen.size() == 150);
  CHECK(derive_seed(7, {1, 2}) != derive_seed(7, {2, 1}));
  CHECK(derive_seed(7, {1}) == derive_seed(7, {1}));
}

TEST_CASE("sha256 known answer") {
  CHECK(sha256_hex("abc") == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
  CHECK(sha256_hex("") == "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
  CHECK(short_digest("") == "e3b0c44298fc1c14");
}

TEST_CASE("canonical bytes ignore key order") {
  const auto a = Json::parse(R"({"b":1,"a":{"y":[1,2],"x":"s"}})");
  const auto b = Json::parse(R"({"a":{"x":"s","y":[1,2]},"b":1})");
  CHECK(canonical_bytes(a) == canonical_bytes(b));
  CHECK(canonical_bytes(a) != canonical_bytes(Json::parse(R"({"a":{"x":"s","y":[2,1]},"b":1})")));
}

TEST_CASE("format_double uses fixed precision") {
  CHECK(format_double(2.5) == "2.500000");
  CHECK(format_double(1.0 / 3.0, 3) == "0.333");
}
