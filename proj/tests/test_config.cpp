#include <doctest.h>

#include "res/config.hpp"
#include "res/textio.hpp"
#include "test_util.hpp"

using namespace res;

TEST_CASE("config parses sections, comments and top-level keys") {
    Config c = Config::parse(
        "# leading comment\n"
        "name = desk run\n"
        "\n"
        "[train]\n"
        "lr = 0.001   # trailing comment\n"
        "epochs = 10\n"
        "[encoder]\n"
        "hidden = 128\n");
    CHECK(c.get("", "name") == "desk run");
    CHECK(c.get_real("train", "lr") == doctest::Approx(0.001));
    CHECK(c.get_int("train", "epochs") == 10);
    CHECK(c.get_int("encoder", "hidden") == 128);
    CHECK(c.has("train", "lr"));
    CHECK(!c.has("train", "momentum"));
}

TEST_CASE("config typed getters fall back and fail loudly") {
    Config c = Config::parse("[a]\nx = 3\ny = hello\n");
    CHECK(c.get_int_or("a", "x", 7) == 3);
    CHECK(c.get_int_or("a", "missing", 7) == 7);
    CHECK(c.get_or("b", "anything", "dflt") == "dflt");
    CHECK(test::fails_with([&] { c.get("a", "missing"); }, "missing"));
    CHECK(test::fails_with([&] { c.get_int("a", "y"); }, "y"));
}

TEST_CASE("config lists split on commas and trim") {
    Config c = Config::parse("[p]\ndomains = alpha, beta ,gamma\none = solo\n");
    auto v = c.get_list("p", "domains");
    REQUIRE(v.size() == 3);
    CHECK(v[0] == "alpha");
    CHECK(v[1] == "beta");
    CHECK(v[2] == "gamma");
    CHECK(c.get_list("p", "one") == std::vector<std::string>{"solo"});
}

TEST_CASE("config dump parses back to the same values") {
    Config c;
    c.set("", "top", "1");
    c.set("train", "lr", "0.0003");
    c.set("train", "epochs", "4");
    c.set("z", "key", "value with spaces");
    Config back = Config::parse(c.dump());
    CHECK(back.get("", "top") == "1");
    CHECK(back.get("train", "lr") == "0.0003");
    CHECK(back.get("z", "key") == "value with spaces");
    CHECK(back.sections() == c.sections());
}

TEST_CASE("config loads from a file") {
    test::TempDir tmp("config");
    write_file_atomic(tmp.file("a.cfg"), "[s]\nk = v\n");
    Config c = Config::load(tmp.file("a.cfg"));
    CHECK(c.get("s", "k") == "v");
    CHECK(test::fails_with([&] { Config::load(tmp.file("nope.cfg")); }, "nope.cfg"));
}
