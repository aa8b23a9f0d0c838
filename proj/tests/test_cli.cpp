#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <sys/wait.h>

#include "odm/channel.hpp"
#include "odm/harness.hpp"
#include "support/oracle.hpp"

namespace fs = std::filesystem;
namespace hand = odm::test::hand;

namespace {

struct Run {
    int code = -1;
    std::string out;
    std::string err;
};

std::string slurp(const fs::path& p) {
    std::ifstream is(p, std::ios::binary);
    std::ostringstream ss;
    ss << is.rdbuf();
    return ss.str();
}

void spit(const fs::path& p, const std::string& text) {
    std::ofstream(p, std::ios::binary) << text;
}

class Sandbox {
public:
    Sandbox() : dir_(fs::temp_directory_path() / ("odm_cli_" + std::to_string(counter_++))) {
        fs::remove_all(dir_);
        fs::create_directories(dir_);
    }
    ~Sandbox() {
        std::error_code ec;
        fs::remove_all(dir_, ec);
    }
    [[nodiscard]] const fs::path& dir() const { return dir_; }
    [[nodiscard]] fs::path operator/(const std::string& name) const { return dir_ / name; }

    Run run(const std::string& args) const {
        const auto out = dir_ / ".stdout";
        const auto err = dir_ / ".stderr";
        const std::string cmd = std::string("\"") + ODM_CLI_PATH + "\" " + args + " >\"" + out.string() +
                                "\" 2>\"" + err.string() + "\"";
        const int status = std::system(cmd.c_str());
        Run r;
        r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
        r.out = slurp(out);
        r.err = slurp(err);
        fs::remove(out);
        fs::remove(err);
        return r;
    }

private:
    fs::path dir_;
    static inline int counter_ = 0;
};

std::string config(const std::string& name) {
    return "\"" + (fs::path(ODM_CONFIG_DIR) / name).string() + "\"";
}

std::size_t count_lines(const std::string& text) {
    return static_cast<std::size_t>(std::count(text.begin(), text.end(), '\n'));
}

} // namespace

TEST_CASE("usage errors exit with 2") {
    Sandbox box;
    CHECK(box.run("").code == 2);
    CHECK(box.run("bogus").code == 2);
    CHECK(box.run("simulate").code == 2);
    CHECK(box.run("verify --config " + config("sine.json") + " --rule fancy").code == 2);
    CHECK(box.run("simulate --config /nonexistent.json").code == 2);
    CHECK(box.run("--help").code == 0);
}

TEST_CASE("simulate writes the reference experiments") {
    Sandbox box;
    const auto r = box.run("simulate --config " + config("reference_delta004.json") + " --out \"" + box.dir().string() + "\"");
    REQUIRE(r.code == 0);
    const auto csv = slurp(box / "reference_delta004_trace.csv");
    CHECK(count_lines(csv) == 51);
    CHECK(csv.rfind("k,t,x,y,h,M,in_switch,err_abs\n0,0,2,5,-1,0.08,0,3\n", 0) == 0);
    const auto report = odm::Json::parse(slurp(box / "reference_delta004_report.json"));
    CHECK(report["bits"] == 50);

    REQUIRE(box.run("simulate --config " + config("reference_delta002.json") + " --out \"" + box.dir().string() + "\"").code == 0);
    CHECK(count_lines(slurp(box / "reference_delta002_trace.csv")) == 101);

    // flag overrides the config file
    REQUIRE(box.run("simulate --config " + config("reference_delta004.json") + " --delta 0.02 --out \"" +
                    box.dir().string() + "\"").code == 0);
    CHECK(count_lines(slurp(box / "reference_delta004_trace.csv")) == 101);
}

TEST_CASE("simulate output is byte-identical across runs") {
    Sandbox a, b;
    REQUIRE(a.run("simulate --config " + config("sine_erasure.json") + " --out \"" + a.dir().string() + "\"").code == 0);
    REQUIRE(b.run("simulate --config " + config("sine_erasure.json") + " --out \"" + b.dir().string() + "\"").code == 0);
    CHECK(slurp(a / "sine_erasure_trace.csv") == slurp(b / "sine_erasure_trace.csv"));
    CHECK(slurp(a / "sine_erasure_report.json") == slurp(b / "sine_erasure_report.json"));

    REQUIRE(b.run("simulate --seed 2 --config " + config("sine_erasure.json") + " --out \"" + b.dir().string() + "\"").code == 0);
    CHECK(slurp(a / "sine_erasure_report.json") != slurp(b / "sine_erasure_report.json"));
}

TEST_CASE("unwritable output leaves no partial files") {
    Sandbox box;
    auto j = odm::Json::parse(slurp(fs::path(ODM_CONFIG_DIR) / "reference_delta004.json"));
    j["outputs"]["report_json"] = "missing/report.json";
    spit(box / "cfg.json", j.dump());
    const auto r = box.run("simulate --config \"" + (box / "cfg.json").string() + "\" --out \"" + box.dir().string() + "\"");
    CHECK(r.code != 0);
    CHECK_FALSE(r.err.empty());
    CHECK(std::distance(fs::directory_iterator(box.dir()), fs::directory_iterator{}) == 1); // only cfg.json
}

TEST_CASE("verify") {
    Sandbox box;
    SUBCASE("sine run verifies") {
        const auto r = box.run("verify --config " + config("sine.json"));
        CHECK(r.code == 0);
        CHECK(r.out.find("violations=0") != std::string::npos);
        CHECK(r.err.empty());
    }
    SUBCASE("floor below 2D warns but passes") {
        const auto r = box.run("verify --config " + config("sine.json") + " --mbar 1 --m0 1");
        CHECK(r.code == 0);
        CHECK(r.err.find("warning") != std::string::npos);
    }
    SUBCASE("tampered trace fails") {
        REQUIRE(box.run("simulate --config " + config("sine.json") + " --out \"" + box.dir().string() + "\"").code == 0);
        const auto good = box.run("verify --config " + config("sine.json") + " --trace \"" +
                                  (box / "sine_trace.csv").string() + "\"");
        CHECK(good.code == 0);

        auto csv = slurp(box / "sine_trace.csv");
        const auto row = csv.find("\n300,");
        REQUIRE(row != std::string::npos);
        // flip the symbol column of row 300 and the next three rows to forge a long run
        std::istringstream in(csv);
        std::string line, forged;
        int n = 0;
        while (std::getline(in, line)) {
            if (n >= 301 && n <= 304) {
                std::vector<std::string> f;
                std::stringstream ls(line);
                for (std::string cell; std::getline(ls, cell, ',');) f.push_back(cell);
                f[4] = "+1";
                line.clear();
                for (std::size_t i = 0; i < f.size(); ++i) line += (i ? "," : "") + f[i];
                if (f.size() == 7) line += ",";
            }
            forged += line + "\n";
            ++n;
        }
        spit(box / "forged.csv", forged);
        const auto bad = box.run("verify --config " + config("sine.json") + " --trace \"" +
                                 (box / "forged.csv").string() + "\"");
        CHECK(bad.code == 1);
        CHECK(bad.out.find("symbol_run") != std::string::npos);
    }
    SUBCASE("malformed trace is a format error") {
        spit(box / "bad.csv", "k,t,x,y,h,M,in_switch,err_abs\n0,0,0,0,+1,1,0,0\n1,zz,0,0,+1,1,0,0\n");
        const auto r = box.run("verify --config " + config("sine.json") + " --trace \"" + (box / "bad.csv").string() + "\"");
        CHECK(r.code == 2);
        CHECK(r.err.find("line 3") != std::string::npos);
    }
}

TEST_CASE("compare") {
    Sandbox box;
    const auto r = box.run("compare --config " + config("reference_delta004.json") + " --out \"" + box.dir().string() + "\"");
    REQUIRE(r.code == 0);
    const auto j = odm::Json::parse(r.out);
    CHECK(j == odm::Json::parse(slurp(box / "comparison.json")));
    CHECK(j["jump_index"] == 25);
    CHECK(box.run("compare --config " + config("sine.json")).code == 2);
}

TEST_CASE("encode and decode") {
    Sandbox box;
    std::string samples = "x\n";
    for (int k = 0; k < 10; ++k) samples += "10\n";
    spit(box / "hand.csv", samples);

    const auto enc = box.run("encode \"" + (box / "hand.csv").string() + "\" --a 2 --m0 1 --mbar 1 --y0 0 --delta 1 -o \"" +
                             (box / "hand.odm").string() + "\"");
    REQUIRE(enc.code == 0);
    const auto stream = odm::parse_bitstream(slurp(box / "hand.odm"));
    CHECK(odm::bits_to_string(stream.bits) == hand::kBody);
    CHECK(stream.params == hand::params());

    const auto dec = box.run("decode \"" + (box / "hand.odm").string() + "\"");
    REQUIRE(dec.code == 0);
    const auto trace = odm::parse_trace_csv(dec.out, stream.params);
    REQUIRE(trace.records.size() == 10);
    for (std::size_t k = 0; k < 10; ++k) {
        CHECK(trace.records[k].y == hand::kY[k]);
        CHECK(trace.records[k].m == hand::kM[k]);
    }

    SUBCASE("empty samples give an empty bitstream") {
        spit(box / "empty.csv", "");
        const auto r = box.run("encode \"" + (box / "empty.csv").string() + "\"");
        CHECK(r.code == 0);
        CHECK(odm::parse_bitstream(r.out).bits.empty());
    }
    SUBCASE("malformed samples name the row") {
        spit(box / "bad.csv", "x\n1\n2\noops\n");
        const auto r = box.run("encode \"" + (box / "bad.csv").string() + "\"");
        CHECK(r.code == 2);
        CHECK(r.err.find("line 4") != std::string::npos);
    }
    SUBCASE("corrupt bitstream") {
        spit(box / "bad.odm", "ODM/9\n");
        CHECK(box.run("decode \"" + (box / "bad.odm").string() + "\"").code == 2);
    }
    SUBCASE("defaults") {
        const auto r = box.run("encode \"" + (box / "hand.csv").string() + "\"");
        REQUIRE(r.code == 0);
        const auto p = odm::parse_bitstream(r.out).params;
        CHECK(p == odm::CodecParams{0.0, 1.0, 1.0, 1.5, 1.0, odm::AdaptationRule::Modified});
    }
}
