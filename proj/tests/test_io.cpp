#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <fstream>
#include <iterator>

#include "revmix/io.hpp"

using namespace revmix;
namespace fs = std::filesystem;

namespace {

fs::path tmp(const std::string& name) { return fs::temp_directory_path() / ("revmix_test_io_" + name); }

std::vector<unsigned char> bytes(const fs::path& p) {
    std::ifstream f(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(f), std::istreambuf_iterator<char>()};
}

}  // namespace

TEST_CASE("grid files: header layout and round trip") {
    const auto p = tmp("grid.bin");
    const std::vector<double> v{1.0, -2.5, 3.25, 0.0, 1e-300, 7.0};
    io::write_grid(p, 2, 3, v);
    const auto b = bytes(p);
    REQUIRE(b.size() == 16 + 8 * v.size());
    CHECK(std::string(b.begin(), b.begin() + 4) == "RMXH");
    CHECK(b[4] == 2);
    CHECK(b[5] == 0);
    CHECK(b[8] == 3);
    for (int i = 12; i < 16; ++i) CHECK(b[i] == 0);
    double first;
    std::memcpy(&first, b.data() + 16, 8);
    CHECK(first == 1.0);
    const auto g = io::read_grid(p);
    CHECK(g.n_xi == 2);
    CHECK(g.n_eta == 3);
    CHECK(g.values == v);
    CHECK_THROWS_AS(io::write_grid(p, 2, 2, v), ConfigError);
    fs::remove(p);
}

TEST_CASE("grid files: bad magic and truncation") {
    const auto p = tmp("bad.bin");
    {
        std::ofstream f(p, std::ios::binary);
        f << "XXXXabcdefghijkl";
    }
    CHECK_THROWS_AS(io::read_grid(p), ConfigError);
    io::write_grid(p, 4, 4, std::vector<double>(16, 1.0));
    fs::resize_file(p, 16 + 8 * 10);
    CHECK_THROWS_AS(io::read_grid(p), ConfigError);
    fs::remove(p);
    CHECK_THROWS_AS(io::read_grid(p), ConfigError);
}

TEST_CASE("CSV writers carry units in their headers") {
    const auto p = tmp("orbits.csv");
    {
        io::CsvWriter w(p, io::orbit_header());
        OrbitRecord r;
        r.point = {1.0, 0.0};
        r.type = OrbitType::saddle;
        r.epsilon = 0.7;
        io::orbit_row(w, r);
    }
    std::ifstream f(p);
    std::string header, row;
    std::getline(f, header);
    std::getline(f, row);
    CHECK(header.find("xi[rad]") != std::string::npos);
    CHECK(header.find("eta[rad]") != std::string::npos);
    CHECK(row.rfind("0.69999999999999996,1,1,0", 0) == 0);
    CHECK(row.find("saddle") != std::string::npos);
    fs::remove(p);

    const auto q = tmp("cloud.csv");
    io::write_cloud(q, std::vector<TorusPoint2>{{0.5, 0.25}});
    std::ifstream g(q);
    std::getline(g, header);
    std::getline(g, row);
    CHECK(header == "xi[rad],eta[rad]");
    CHECK(row == "0.5,0.25");
    fs::remove(q);
}
