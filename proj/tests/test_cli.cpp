#include <gtest/gtest.h>

#include <sys/wait.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <regex>
#include <sstream>

#include <json.hpp>

#include "secg/secg.hpp"

using namespace secg;
namespace fs = std::filesystem;

namespace {

const fs::path kData = SECG_TEST_DATA;

class Cli : public ::testing::Test {
 protected:
  fs::path dir;

  void SetUp() override {
    dir = fs::temp_directory_path() /
          ("secg_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir);
    fs::create_directories(dir);
  }
  void TearDown() override { fs::remove_all(dir); }

  // Runs the CLI; stdout goes to `out`, stderr to `err`.
  int run(const std::string& args) {
    const std::string cmd = std::string("\"") + SECG_CLI + "\" " + args + " >\"" + (dir / "stdout").string() + "\" 2>\"" +
                            (dir / "stderr").string() + "\"";
    const int st = std::system(cmd.c_str());
    out = slurp(dir / "stdout");
    err = slurp(dir / "stderr");
    return WIFEXITED(st) ? WEXITSTATUS(st) : -1;
  }

  static std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), {}};
  }

  std::string path(const std::string& name) const { return "\"" + (dir / name).string() + "\""; }

  // The first n samples of the bundled record-208 excerpt as raw int16.
  std::string excerpt(std::size_t n) {
    const auto bytes = read_file_bytes(kData / "mitdb208_excerpt.i16");
    std::ofstream(dir / "rec.i16", std::ios::binary).write(reinterpret_cast<const char*>(bytes.data()), 2 * n);
    return path("rec.i16");
  }

  double field(const std::string& name) const {
    const std::regex re("(^|[ \\n])" + std::regex_replace(name, std::regex(R"(\^)"), R"(\^)") + "=([^ \\n]+)");
    std::smatch m;
    if (!std::regex_search(out, m, re)) return NAN;
    return std::stod(m[2]);
  }

  std::string out, err;
};

}  // namespace

TEST_F(Cli, HelpAndUsageErrors) {
  EXPECT_EQ(run("--help"), 0);
  EXPECT_NE(out.find("compress"), std::string::npos);
  EXPECT_EQ(run(""), 2);
  EXPECT_EQ(run("transmogrify"), 2);
  EXPECT_EQ(run("compress --bogus x -o y"), 2);
}

TEST_F(Cli, ConfigErrorsComeBeforeFileAccess) {
  // The input does not exist either; the flag check wins.
  EXPECT_EQ(run("compress " + path("missing.i16") + " -o " + path("o.secg") + " --delta 0"), 2);
  EXPECT_EQ(run("compress " + path("missing.i16") + " -o " + path("o.secg") + " --family haar9"), 2);
  EXPECT_EQ(run("compress " + path("missing.i16") + " -o " + path("o.secg") + " --nb 1"), 2);
  EXPECT_EQ(run("compress " + path("missing.i16") + " -o " + path("o.secg") + " --format edf"), 2);
  EXPECT_EQ(run("build-dict --jmin 5 --jmax 4"), 2);
  EXPECT_FALSE(fs::exists(dir / "o.secg"));
}

TEST_F(Cli, ConfigFileKeys) {
  const auto in = excerpt(3000);
  std::ofstream(dir / "bad.json") << R"({"delta": 35, "speed": 3})";
  EXPECT_EQ(run("compress " + in + " --format raw_i16 -o " + path("o.secg") + " --config " + path("bad.json")), 2);
  std::ofstream(dir / "type.json") << R"({"delta": "big"})";
  EXPECT_EQ(run("compress " + in + " --format raw_i16 -o " + path("o.secg") + " --config " + path("type.json")), 2);
  std::ofstream(dir / "ok.json") << R"({"family": "cdf53", "delta": 50, "prd0": 0.8, "huffman": false})";
  ASSERT_EQ(run("compress " + in + " --format raw_i16 -o " + path("o.secg") + " --config " + path("ok.json")), 0)
      << err;
  const auto m = decode(EncodedContainer::from_bytes(read_file_bytes(dir / "o.secg")));
  EXPECT_EQ(m.delta, 50.0);
  EXPECT_EQ(m.dictionary.family, WaveletFamily::CDF53);
  // Flags override the file.
  ASSERT_EQ(run("compress " + in + " --format raw_i16 -o " + path("o.secg") + " --config " + path("ok.json") +
                " --delta 20"),
            0);
  EXPECT_EQ(decode(EncodedContainer::from_bytes(read_file_bytes(dir / "o.secg"))).delta, 20.0);
}

TEST_F(Cli, MissingInputLeavesNoOutput) {
  EXPECT_EQ(run("compress " + path("missing.hea") + " -o " + path("o.secg")), 3);
  EXPECT_NE(err.find("missing"), std::string::npos);
  EXPECT_EQ(run("decompress " + path("missing.secg") + " -o " + path("o.i16")), 3);
  EXPECT_EQ(run("profile " + path("missing.csv") + " --format csv -o " + path("p.csv")), 3);
  for (const auto& e : fs::directory_iterator(dir)) {
    const auto n = e.path().filename().string();
    EXPECT_TRUE(n == "stdout" || n == "stderr") << n;
  }
}

TEST_F(Cli, MalformedRecordIsAnIngestionError) {
  std::ofstream(dir / "bad.csv") << "1\n2\nthree\n";
  EXPECT_EQ(run("compress " + path("bad.csv") + " --format csv -o " + path("o.secg")), 3);
  EXPECT_FALSE(fs::exists(dir / "o.secg"));
}

TEST_F(Cli, CorruptContainerExitCode) {
  const auto in = excerpt(2000);
  ASSERT_EQ(run("compress " + in + " --format raw_i16 -o " + path("o.secg")), 0) << err;
  auto bytes = read_file_bytes(dir / "o.secg");
  bytes.pop_back();
  std::ofstream(dir / "cut.secg", std::ios::binary).write(reinterpret_cast<const char*>(bytes.data()), bytes.size());
  EXPECT_EQ(run("decompress " + path("cut.secg") + " -o " + path("o.i16")), 4);
  EXPECT_FALSE(fs::exists(dir / "o.i16"));
  bytes = read_file_bytes(dir / "o.secg");
  bytes[36] ^= 0x10;
  std::ofstream(dir / "id.secg", std::ios::binary).write(reinterpret_cast<const char*>(bytes.data()), bytes.size());
  EXPECT_EQ(run("decompress " + path("id.secg") + " -o " + path("o.i16")), 4);
}

TEST_F(Cli, CompressDecompressMetricsAgreeOnPrd) {
  const auto in = excerpt(9000);
  ASSERT_EQ(run("compress " + in + " --format raw_i16 --prd0 0.4 --delta 35 -o " + path("o.secg")), 0) << err;
  const double prd_c = field("PRD");
  const double sr_c = field("SR");
  ASSERT_TRUE(std::isfinite(prd_c)) << out;
  for (const auto* k : {"PRDN", "CR", "CR^Hf", "QS", "time"}) EXPECT_TRUE(std::isfinite(field(k))) << k << ": " << out;

  ASSERT_EQ(run("metrics " + in + " " + path("o.secg") + " --format raw_i16"), 0) << err;
  const auto j = nlohmann::json::parse(out);
  EXPECT_NEAR(j["prd"].get<double>(), prd_c, 1e-9);
  EXPECT_NEAR(j["sr"].get<double>(), sr_c, 1e-4 * sr_c);
  EXPECT_EQ(j["samples"].get<int>(), 9000);

  ASSERT_EQ(run("decompress " + path("o.secg") + " --csv -o " + path("r.csv")), 0) << err;
  ASSERT_EQ(run("metrics " + in + " " + path("r.csv") + " --format raw_i16"), 0) << err;
  EXPECT_NEAR(nlohmann::json::parse(out)["prd"].get<double>(), prd_c, 1e-9);

  // Default raw int16 output: same length, values rounded.
  ASSERT_EQ(run("decompress " + path("o.secg") + " -o " + path("r.i16")), 0) << err;
  EXPECT_EQ(fs::file_size(dir / "r.i16"), 18000U);
  ASSERT_EQ(run("metrics " + in + " " + path("r.i16") + " --format raw_i16 --recon-format raw_i16"), 0) << err;
  EXPECT_NEAR(nlohmann::json::parse(out)["prd"].get<double>(), prd_c, 0.05);
}

TEST_F(Cli, LoosePrd0GivesOneTermPerSegment) {
  const auto in = excerpt(5000);
  ASSERT_EQ(run("compress " + in + " --format raw_i16 --prd0 100 -o " + path("o.secg")), 0) << err;
  EXPECT_EQ(field("SR"), 500.0);
}

TEST_F(Cli, TargetPrdTuning) {
  const auto in = excerpt(9000);
  ASSERT_EQ(run("compress " + in + " --format raw_i16 --target-prd 0.6 -o " + path("o.secg")), 0) << err;
  EXPECT_NEAR(field("PRD"), 0.6, 0.02) << out;
  EXPECT_TRUE(std::isfinite(field("prd0"))) << out;
}

TEST_F(Cli, ProfileOfSinusoidHasNoFlags) {
  {
    std::ofstream f(dir / "sine.csv");
    for (int i = 0; i < 20000; ++i) f << 1000.0 + 300.0 * std::sin(2 * std::numbers::pi * 1.2 * i / 360.0) << '\n';
  }
  ASSERT_EQ(run("profile " + path("sine.csv") + " --format csv -o " + path("p.csv")), 0) << err;
  std::istringstream lines(slurp(dir / "p.csv"));
  std::string line;
  std::getline(lines, line);
  EXPECT_EQ(line, "q,inv_sr,prd_q,flagged");
  int rows = 0, flagged = 0;
  while (std::getline(lines, line)) {
    ++rows;
    flagged += line.back() == '1';
  }
  EXPECT_EQ(rows, 40);
  EXPECT_EQ(flagged, 0);
  EXPECT_NE(err.find("flagged=0"), std::string::npos) << err;
}

TEST_F(Cli, BuildDictAndDump) {
  ASSERT_EQ(run("build-dict --family db4 --dict-dump " + path("d.bin")), 0) << err;
  const auto d = load_dictionary_dump(read_file_bytes(dir / "d.bin"));
  const auto ref = build_dictionary(DictionaryConfig::dictionary(WaveletFamily::Db4));
  EXPECT_EQ(d.size(), ref.size());
  EXPECT_TRUE(d.atoms() == ref.atoms());
  EXPECT_EQ(fs::file_size(dir / "d.bin"), 4 + 2 + 28 + 8 + ref.size() * (500 * 8 + 6));
  EXPECT_NE(out.find("atoms=" + std::to_string(ref.size())), std::string::npos) << out;
}

TEST_F(Cli, BenchmarkSingleRecordHasZeroStd) {
  fs::create_directories(dir / "db");
  const auto bytes = read_file_bytes(kData / "mitdb208_excerpt.i16");
  std::ofstream(dir / "db" / "208.i16", std::ios::binary).write(reinterpret_cast<const char*>(bytes.data()), 2 * 6000);
  std::ofstream(dir / "db" / "broken.i16", std::ios::binary) << "abc";
  ASSERT_EQ(run("benchmark " + path("db") + " --format raw_i16 --jobs 2 -o " + path("b.csv")), 0) << err;
  EXPECT_NE(err.find("skipping broken"), std::string::npos) << err;
  std::istringstream lines(slurp(dir / "b.csv"));
  std::vector<std::string> v;
  for (std::string l; std::getline(lines, l);) v.push_back(l);
  ASSERT_EQ(v.size(), 4U);
  EXPECT_EQ(v[0], kBenchmarkCsvHeader);
  EXPECT_EQ(v[1].substr(0, 4), "208,");
  EXPECT_EQ(v[1].substr(3, v[1].rfind(',') - 3), v[2].substr(4, v[2].rfind(',') - 4));
  EXPECT_EQ(v[3].substr(0, 4), "std,");
  EXPECT_EQ(v[3].find_first_not_of("std,0"), std::string::npos) << v[3];
}

TEST_F(Cli, BenchmarkSweepAndEmptyDirectory) {
  fs::create_directories(dir / "db");
  const auto bytes = read_file_bytes(kData / "mitdb208_excerpt.i16");
  for (int r = 0; r < 2; ++r)
    std::ofstream(dir / "db" / ("r" + std::to_string(r) + ".i16"), std::ios::binary)
        .write(reinterpret_cast<const char*>(bytes.data()) + 12000 * r, 2 * 3000);
  ASSERT_EQ(run("benchmark " + path("db") + " --format raw_i16 --sweep --table"), 0) << err;
  std::istringstream lines(out);
  int n = 0;
  for (std::string l; std::getline(lines, l);) ++n;
  EXPECT_EQ(n, 1 + 15 * 4);
  EXPECT_NE(err.find("CR^Hf"), std::string::npos);
  fs::create_directories(dir / "empty");
  EXPECT_EQ(run("benchmark " + path("empty") + " --format raw_i16"), 3);
}
