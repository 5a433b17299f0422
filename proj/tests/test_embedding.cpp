#include <cmath>
#include <string>
#include <vector>

#include "doctest.h"
#include "latk/embedding.hpp"
#include "latk/error.hpp"
#include "latk/rng.hpp"

using namespace latk;

TEST_SUITE("embedding") {

TEST_CASE("loads the documented example") {
    Rng rng(41);
    auto t = load_embeddings("2 3\na 1 2 3\nb 4 5 6\n", {}, rng);
    CHECK(t.d_emb == 3);
    CHECK(t.index_to_token == std::vector<std::string>{"<PAD>", "<UNK>", "a", "b"});
    CHECK(t.lookup("a") == 2);
    const double* a = t.vectors.row(t.lookup("a"));
    CHECK(a[0] == 1.0);
    CHECK(a[1] == 2.0);
    CHECK(a[2] == 3.0);
    const double* b = t.vectors.row(t.lookup("b"));
    CHECK(b[0] == 4.0);
    CHECK(b[2] == 6.0);
    // OOV falls back to <UNK>
    CHECK(t.lookup("c") == t.unk_index());
    // <PAD> is the zero row, <UNK> is randomly initialized within range
    double bound = std::sqrt(3.0 / 3.0);
    for (std::size_t k = 0; k < 3; ++k) {
        CHECK(t.vectors(t.pad_index(), k) == 0.0);
        CHECK(std::fabs(t.vectors(t.unk_index(), k)) <= bound);
    }
}

TEST_CASE("decimal parses are bit-exact") {
    Rng rng(42);
    auto t = load_embeddings("1 2\nx 0.1 -3.25e-2\n", {}, rng);
    CHECK(t.vectors(t.lookup("x"), 0) == 0.1);
    CHECK(t.vectors(t.lookup("x"), 1) == -3.25e-2);
}

TEST_CASE("required tokens extend the vocabulary deterministically") {
    Rng r1(7), r2(7);
    auto t1 = load_embeddings("1 4\na 1 2 3 4\n", {"b", "a", "c", "b"}, r1);
    auto t2 = load_embeddings("1 4\na 1 2 3 4\n", {"b", "a", "c", "b"}, r2);
    CHECK(t1.index_to_token == std::vector<std::string>{"<PAD>", "<UNK>", "a", "b", "c"});
    CHECK(t1.vectors.data == t2.vectors.data);
    double bound = std::sqrt(3.0 / 4.0);
    for (std::size_t k = 0; k < 4; ++k) {
        CHECK(std::fabs(t1.vectors(3, k)) <= bound);
        CHECK(t1.vectors(3, k) != t1.vectors(4, k));
    }
}

TEST_CASE("file can override special-token rows") {
    Rng rng(43);
    auto t = load_embeddings("2 2\n<UNK> 9 9\nq 1 1\n", {}, rng);
    CHECK(t.vectors(t.unk_index(), 0) == 9.0);
    CHECK(t.vectors(t.unk_index(), 1) == 9.0);
    CHECK(t.index_to_token.size() == 3);
}

TEST_CASE("format errors carry positions") {
    Rng rng(44);
    CHECK_THROWS_AS(load_embeddings("", {}, rng), ParseError);
    CHECK_THROWS_AS(load_embeddings("2\n", {}, rng), ParseError);
    CHECK_THROWS_AS(load_embeddings("1 0\n", {}, rng), ParseError);
    CHECK_THROWS_AS(load_embeddings("x y\n", {}, rng), ParseError);
    // header dim 3 but a row has 4 values
    try {
        load_embeddings("2 3\na 1 2 3\nb 1 2 3 4\n", {}, rng);
        FAIL("expected ParseError");
    } catch (const ParseError& e) {
        CHECK(std::string(e.what()).find("line 3") != std::string::npos);
    }
    CHECK_THROWS_AS(load_embeddings("1 2\na 1 oops\n", {}, rng), ParseError);
    CHECK_THROWS_AS(load_embeddings("2 2\na 1 2\n", {}, rng), ParseError);
    CHECK_THROWS_AS(load_embeddings("1 2\na 1 2\nb 3 4\n", {}, rng), ParseError);
    CHECK_THROWS_AS(load_embeddings("2 2\na 1 2\na 3 4\n", {}, rng), ParseError);
}

TEST_CASE("random_embeddings covers required tokens") {
    Rng r1(9), r2(9);
    auto t1 = random_embeddings(8, {"x", "y", "x"}, r1);
    auto t2 = random_embeddings(8, {"x", "y", "x"}, r2);
    CHECK(t1.index_to_token == std::vector<std::string>{"<PAD>", "<UNK>", "x", "y"});
    CHECK(t1.vectors.data == t2.vectors.data);
    for (std::size_t k = 0; k < 8; ++k) CHECK(t1.vectors(0, k) == 0.0);
    double bound = std::sqrt(3.0 / 8.0);
    double max_abs = 0.0;
    for (std::size_t i = 1; i < 4; ++i)
        for (std::size_t k = 0; k < 8; ++k)
            max_abs = std::max(max_abs, std::fabs(t1.vectors(i, k)));
    CHECK(max_abs <= bound);
    CHECK(max_abs > 0.0);
    CHECK_THROWS_AS(random_embeddings(0, {}, r1), ParamError);
}

}  // TEST_SUITE
