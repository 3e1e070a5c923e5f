#include <doctest.h>
#include <json.hpp>

#include <openssl/evp.h>
#include <sys/wait.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

namespace fs = std::filesystem;
using json = nlohmann::json;

namespace {

fs::path scratch(const std::string& name) {
    static const fs::path root = [] {
        auto p = fs::temp_directory_path() / ("exactlab_cli_test_" + std::to_string(::getpid()));
        fs::remove_all(p);
        fs::create_directories(p);
        return p;
    }();
    return root / name;
}

int cli(const std::string& args) {
    const std::string cmd = std::string(EXACTLAB_CLI) + " " + args + " 2>/dev/null >/dev/null";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

std::string sha256(const std::string& data) {
    unsigned char md[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    EVP_Digest(data.data(), data.size(), md, &len, EVP_sha256(), nullptr);
    std::string hex;
    char buf[3];
    for (unsigned int i = 0; i < len; ++i) {
        std::snprintf(buf, sizeof buf, "%02x", md[i]);
        hex += buf;
    }
    return hex;
}

// Every output listed in the manifest exists with the recorded digest.
json check_manifest(const fs::path& dir, const std::string& status) {
    const auto m = json::parse(slurp(dir / "manifest.json"));
    CHECK(m["status"] == status);
    CHECK(m.contains("seed"));
    CHECK(m.contains("version"));
    CHECK(m["end_time"].is_string());
    for (const auto& [name, info] : m["outputs"].items()) {
        const auto content = slurp(dir / name);
        CHECK(info["bytes"] == content.size());
        CHECK(info["sha256"] == sha256(content));
    }
    return m;
}

std::string first_line(const std::string& s) { return s.substr(0, s.find('\n')); }

}  // namespace

TEST_CASE("disagreement run writes a consistent manifest") {
    const auto dir = scratch("dis");
    REQUIRE(cli("disagreement --m 1 2 3 --out " + dir.string()) == 0);
    const auto m = check_manifest(dir, "ok");
    CHECK(m["outputs"].contains("disagreement.csv"));
    const auto csv = slurp(dir / "disagreement.csv");
    CHECK(first_line(csv) == "pair,m,d,method,samples,probability,exact,halfwidth,closed_form");
    CHECK(csv.find('\r') == std::string::npos);
    CHECK(csv.back() == '\n');
    CHECK(csv.find(",1/8,") != std::string::npos);
}

TEST_CASE("outputs are identical across reruns and thread counts") {
    const auto a = scratch("fp1"), b = scratch("fp4");
    const std::string args = "failure-prob --trials 300 --n-grid 1 2 --seed 3";
    REQUIRE(cli(args + " --threads 1 --out " + a.string()) == 0);
    REQUIRE(cli(args + " --threads 4 --out " + b.string()) == 0);
    CHECK(slurp(a / "failure.csv") == slurp(b / "failure.csv"));
    CHECK(slurp(a / "failure_bound.csv") == slurp(b / "failure_bound.csv"));
    check_manifest(a, "ok");
}

TEST_CASE("config file and flags") {
    const auto dir = scratch("cfg");
    fs::create_directories(dir);
    {
        std::ofstream(dir / "teach.json") << R"({"d": 4, "count": 12, "seed": 5})";
    }
    REQUIRE(cli("teach --config " + (dir / "teach.json").string() + " --out " + (dir / "out").string()) == 0);
    const auto m = check_manifest(dir / "out", "ok");
    CHECK(m["config"]["d"] == 4);
    CHECK(m["config"]["count"] == 12);
    CHECK(m["seed"] == 5);
    const auto summary = slurp(dir / "out" / "teach_summary.csv");
    CHECK(first_line(summary) == "d,targets,certified,max_size,bound");
    CHECK(summary.find("\n4,12,12,") != std::string::npos);

    {
        std::ofstream(dir / "bad.json") << R"({"d": 4, "bogus": 1})";
    }
    const auto bad = dir / "bad_out";
    CHECK(cli("teach --config " + (dir / "bad.json").string() + " --out " + bad.string()) == 1);
    const auto err = json::parse(slurp(bad / "error.json"));
    CHECK(err["kind"] == "config_error");
    CHECK(err["message"].get<std::string>().find("bogus") != std::string::npos);

    // Wrong value type.
    {
        std::ofstream(dir / "typed.json") << R"({"d": "four"})";
    }
    CHECK(cli("teach --config " + (dir / "typed.json").string() + " --out " + (dir / "typed_out").string()) == 1);
    // A flag the command does not use.
    CHECK(cli("teach --trials 5 --out " + (dir / "flag_out").string()) == 1);
}

TEST_CASE("critical-n reports the pairwise and orbit bounds") {
    const auto dir = scratch("crit");
    REQUIRE(cli("critical-n --m 1 2 --out " + dir.string()) == 0);
    check_manifest(dir, "ok");
    const auto csv = slurp(dir / "critical_n.csv");
    CHECK(first_line(csv) == "family,d,group,elements,stabilizer,min_disagreement,critical_n,partial");
    // f0 vs f1 on {0,1}^3 disagree only at the origin: floor(8/2) = 4.
    CHECK(csv.find("f0_f1,3,") != std::string::npos);
    std::istringstream in(csv);
    std::string line;
    bool found = false;
    while (std::getline(in, line))
        if (line.rfind("f0_f1,", 0) == 0) {
            found = true;
            CHECK(line.find(",1/8,4,") != std::string::npos);
        }
    CHECK(found);
}

TEST_CASE("logic datasets round-trip through the verifier") {
    const auto gen = scratch("lg"), ver = scratch("lv");
    REQUIRE(cli("logic-gen --count 40 --seed 8 --out " + gen.string()) == 0);
    check_manifest(gen, "ok");
    CHECK(fs::exists(gen / "rp.jsonl"));
    CHECK(fs::exists(gen / "lp.txt"));
    REQUIRE(cli("logic-verify --config " + [&] {
                auto p = gen / "verify.json";
                std::ofstream(p) << json{{"dataset", (gen / "rp.jsonl").string()}}.dump();
                return p.string();
            }() + " --out " + ver.string()) == 0);
    check_manifest(ver, "ok");
    const auto summary = slurp(ver / "verify_summary.csv");
    CHECK(summary.find("\n40,40,40,40,1\n") != std::string::npos);

    // Deliberately wrong answers are recorded, not fatal.
    const auto answers = gen / "answers.jsonl";
    {
        std::ofstream out(answers);
        out << json{{"id", 0}, {"output", "Answer: maybe"}}.dump() << "\n";
        out << json{{"id", 1}, {"output", "Answer: yes"}}.dump() << "\n";
    }
    const auto ver2 = scratch("lv2");
    {
        std::ofstream(gen / "verify2.json")
            << json{{"dataset", (gen / "rp.jsonl").string()}, {"answers", answers.string()}}.dump();
    }
    REQUIRE(cli("logic-verify --config " + (gen / "verify2.json").string() + " --out " + ver2.string()) == 0);
    const auto verdicts = slurp(ver2 / "verdicts.jsonl");
    const auto v0 = json::parse(first_line(verdicts));
    CHECK(v0.contains("parse_error"));
    CHECK(v0["answer_ok"] == false);
}

TEST_CASE("missing dataset is a reported error") {
    const auto dir = scratch("lv_missing");
    CHECK(cli("logic-verify --out " + dir.string()) == 1);
    const auto m = json::parse(slurp(dir / "manifest.json"));
    CHECK(m["status"] == "failed");
    CHECK(fs::exists(dir / "error.json"));
}
