#include "hbfq/error.hpp"
#include "hbfq/scenario_file.hpp"

#include <doctest.h>

#include <string>

using namespace hbfq;

namespace {

const char* kExample = R"(# example
lambda = 4
mu1 = 5
mu2 = 5
c = 0.2017

[profile]
kind = "uniform"
a = 0
b = 10

[service]
kind = "exponential"
)";

int parse_error_line(const std::string& text) {
  try {
    parse_scenario(text);
  } catch (const ParseError& e) {
    return e.line();
  }
  return -1;
}

}  // namespace

TEST_SUITE("scenario_file") {
  TEST_CASE("example file") {
    const Scenario s = parse_scenario(kExample);
    CHECK(s.lambda == 4.0);
    CHECK(s.mu1 == 5.0);
    CHECK(s.mu2 == 5.0);
    CHECK(s.price == 0.2017);
    CHECK(s.min_bid == 0.0);
    CHECK(s.profile.kind() == TypeProfile::Kind::Uniform);
    CHECK(s.profile.upper() == 10.0);
    CHECK(s.service.kind() == ServiceDistribution::Kind::Exponential);
  }

  TEST_CASE("defaults: m = 0, mu2 = mu1, exponential service") {
    const Scenario s = parse_scenario("lambda = 1\nmu1 = 3\n[profile]\nkind = \"uniform\"\na = 0\nb = 1\n");
    CHECK(s.mu2 == 3.0);
    CHECK(s.min_bid == 0.0);
    CHECK(s.price == 0.0);
    CHECK(s.service.second_moment() == 2.0);
  }

  TEST_CASE("format round trip is exact") {
    const char* texts[] = {
        kExample,
        "lambda = 0.9\nmu1 = 1\nmu2 = 2\nm = 0.1\n[profile]\nkind = \"truncated-exponential\"\na = 0.5\nb = 4\n"
        "rate = 0.8\n[service]\nkind = \"erlang-3\"\n",
        "lambda = 1\nmu1 = 2\n[profile]\nkind = \"piecewise-linear\"\nknots = [0, 1, 4]\nprobs = [0, 0.25, 1]\n"
        "[service]\nkind = \"hyperexponential\"\np = 0.4\nmean1 = 2\n",
        "lambda = 1\nmu1 = 2\n[profile]\nkind = \"uniform\"\na = 0\nb = 1\n[service]\nkind = \"deterministic\"\n",
    };
    for (const char* t : texts) {
      const Scenario a = parse_scenario(t);
      const std::string once = format_scenario(a);
      const Scenario b = parse_scenario(once);
      CHECK(format_scenario(b) == once);
      CHECK(a.lambda == b.lambda);
      CHECK(a.service.second_moment() == b.service.second_moment());
      CHECK(a.profile.cdf(0.7) == b.profile.cdf(0.7));
    }
  }

  TEST_CASE("parse errors carry line numbers") {
    CHECK(parse_error_line("lambda = 4\nmu1 = = 5\n") == 2);
    CHECK(parse_error_line("lambda = 4\nmu1 5\n") == 2);
    CHECK(parse_error_line("lambda = 4\nmu1 = 5\nmu1 = 6\n") == 3);
    CHECK(parse_error_line("lambda = 4\nmu1 = 5\nbogus = 1\n[profile]\nkind = \"uniform\"\na = 0\nb = 1\n") == 3);
    CHECK(parse_error_line("lambda = 4\nmu1 = 5\n[profile]\nkind = \"lognormal\"\na = 0\nb = 1\n") == 4);
    CHECK(parse_error_line("lambda = 4\nmu1 = 5\n[profile\n") == 3);
    CHECK(parse_error_line("lambda = \"four\"\nmu1 = 5\n[profile]\nkind = \"uniform\"\na = 0\nb = 1\n") == 1);
    // Model-level rejections inside a table are reported against the kind line.
    CHECK(parse_error_line("lambda = 1\nmu1 = 5\n[profile]\nkind = \"uniform\"\na = 3\nb = 1\n") == 4);
  }

  TEST_CASE("missing keys and invalid values") {
    CHECK_THROWS_AS(parse_scenario("mu1 = 5\n[profile]\nkind = \"uniform\"\na = 0\nb = 1\n"), ParseError);
    CHECK_THROWS_AS(parse_scenario("lambda = -1\nmu1 = 5\n[profile]\nkind = \"uniform\"\na = 0\nb = 1\n"),
                    InvalidArgument);
    CHECK_THROWS_AS(parse_scenario("lambda = 12\nmu1 = 5\n[profile]\nkind = \"uniform\"\na = 0\nb = 1\n"),
                    UnstableRouting);
  }

  TEST_CASE("missing file is an io error") {
    CHECK_THROWS_AS(load_scenario("/nonexistent/scenario.toml"), IoError);
  }
}
