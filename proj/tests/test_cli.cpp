#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <set>
#include <sys/wait.h>
#include <string>

#include <json.hpp>

namespace fs = std::filesystem;

namespace {

const std::string cli = REVMIX_CLI_PATH;

int run(const std::string& args) {
    const int rc = std::system((cli + " " + args + " > /dev/null 2>&1").c_str());
    return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
}

fs::path workdir(const std::string& name) {
    const fs::path p = fs::temp_directory_path() / ("revmix_test_cli_" + name);
    fs::remove_all(p);
    return p;
}

std::string slurp(const fs::path& p) {
    std::ifstream f(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(f), std::istreambuf_iterator<char>()};
}

std::size_t lines(const fs::path& p) {
    const std::string s = slurp(p);
    return static_cast<std::size_t>(std::count(s.begin(), s.end(), '\n'));
}

}  // namespace

TEST_CASE("invalid invocations exit with status 2") {
    CHECK(run("") == 2);
    CHECK(run("portrait --epsilon 3.0") == 2);
    CHECK(run("scan --epsilon-range 0.5:0.4:0.01") == 2);
    CHECK(run("chain --grid -4") == 2);
    CHECK(run("nosuch") == 2);
}

TEST_CASE("chain: a rerun from config.json is bitwise identical") {
    const auto a = workdir("chain_a"), b = workdir("chain_b");
    REQUIRE(run("chain --epsilon 0.7 --grid 32 --out " + a.string()) == 0);
    REQUIRE(fs::exists(a / "config.json"));
    REQUIRE(run("chain --config " + (a / "config.json").string() + " --out " + b.string()) == 0);
    for (const char* f : {"sets.bin", "components.bin"}) CHECK(slurp(a / f) == slurp(b / f));
    CHECK(fs::file_size(a / "sets.bin") == 16 + 8 * 32 * 32);
    const auto rep = nlohmann::json::parse(slurp(a / "report.json"));
    CHECK(rep.contains("relation"));
    fs::remove_all(a);
    fs::remove_all(b);
}

TEST_CASE("portrait at eps = 0 on a small grid") {
    const auto d = workdir("portrait");
    REQUIRE(run("portrait --epsilon 0 --grid 4 --iters 4:6 --out " + d.string()) == 0);
    CHECK(lines(d / "cloud_forward.csv") == 1 + 16 * 6);
    CHECK(lines(d / "cloud_backward.csv") == 1 + 16 * 6);
    CHECK(fs::file_size(d / "density_forward.bin") == 16 + 8 * 256 * 256);
    const std::string div = slurp(d / "divergence.csv");
    CHECK(div.rfind("direction,epsilon,mean_divergence[1/time]", 0) == 0);
    fs::remove_all(d);
}

TEST_CASE("manifolds at eps = 0.7: four saddles, sixteen branches, no crossings") {
    const auto d = workdir("manifolds");
    REQUIRE(run("manifolds --epsilon 0.7 --budget 10 --out " + d.string()) == 0);
    const std::string poly = slurp(d / "polylines.csv");
    std::set<std::string> ids;
    std::size_t pos = poly.find('\n') + 1;
    while (pos < poly.size()) {
        ids.insert(poly.substr(pos, poly.find(',', pos) - pos));
        pos = poly.find('\n', pos) + 1;
    }
    CHECK(ids.size() == 16);
    CHECK(lines(d / "orbits.csv") == 5);
    CHECK(lines(d / "events.csv") == 1);
    fs::remove_all(d);
}

TEST_CASE("regress runs a single check") {
    const auto d = workdir("regress");
    CHECK(run("regress --only 12 --out " + d.string()) == 0);
    CHECK(fs::exists(d / "regress.json"));
    fs::remove_all(d);
}
