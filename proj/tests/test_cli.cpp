#include <gtest/gtest.h>

#include <sys/wait.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

namespace {

namespace fs = std::filesystem;

const std::string kCli = DELAYSYS_CLI;
const std::string kSpecs = DELAYSYS_SPECS;

struct Outcome {
  int code = -1;
  std::string out;
  std::string err;
};

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / "delaysys_cli_test";
  fs::create_directories(dir);
  return dir / name;
}

Outcome run(const std::string& args) {
  const fs::path err = scratch("stderr.txt");
  const std::string cmd = kCli + " " + args + " 2>" + err.string();
  Outcome r;
  FILE* pipe = popen(cmd.c_str(), "r");
  if (!pipe) return r;
  char buf[4096];
  std::size_t n;
  while ((n = fread(buf, 1, sizeof buf, pipe)) > 0) r.out.append(buf, n);
  const int status = pclose(pipe);
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  r.err = slurp(err);
  return r;
}

std::vector<std::string> lines(const std::string& text) {
  std::vector<std::string> out;
  std::istringstream in(text);
  for (std::string line; std::getline(in, line);) {
    if (!line.empty()) out.push_back(line);
  }
  return out;
}

std::vector<double> fields(const std::string& row) {
  std::vector<double> out;
  std::istringstream in(row);
  for (std::string cell; std::getline(in, cell, ',');) out.push_back(std::stod(cell));
  return out;
}

std::string spec(const std::string& name) { return "--spec " + kSpecs + "/" + name; }

}  // namespace

TEST(Cli, SimulateStepsBenchmark) {
  const Outcome r = run("simulate " + spec("steps.json") + " --step 1e-3 --horizon 2");
  ASSERT_EQ(r.code, 0) << r.err;
  const auto rows = lines(r.out);
  ASSERT_EQ(rows.size(), 3002u);
  EXPECT_EQ(rows.front(), "t,x[0]");
  const auto last = fields(rows.back());
  ASSERT_EQ(last.size(), 2u);
  EXPECT_NEAR(last[0], 2.0, 1e-12);
  EXPECT_NEAR(last[1], 3.5, 1e-5);
}

TEST(Cli, SimulateDirectMethod) {
  const Outcome r = run("simulate " + spec("steps.json") + " --step 1e-3 --horizon 2 --method direct");
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NEAR(fields(lines(r.out).back())[1], 3.5, 1e-5);
}

TEST(Cli, SpectrumCriticalRoot) {
  const Outcome r = run("spectrum " + spec("critical_delay.json") + " --region=-1,1,0,2");
  ASSERT_EQ(r.code, 0) << r.err;
  const auto rows = lines(r.out);
  ASSERT_EQ(rows.size(), 2u);
  EXPECT_EQ(rows[0], "re,im,abs_det,newton_iters");
  const auto root = fields(rows[1]);
  EXPECT_NEAR(root[0], 0.0, 1e-8);
  EXPECT_NEAR(root[1], 1.5708, 1e-4);
  EXPECT_NEAR(root[1], std::acos(-1.0) / 2, 1e-8);
}

TEST(Cli, ResolventTable) {
  const Outcome r = run("resolvent " + spec("decay.json") + " --step 0.5 --horizon 1");
  ASSERT_EQ(r.code, 0) << r.err;
  const auto rows = lines(r.out);
  ASSERT_EQ(rows.size(), 4u);
  EXPECT_EQ(rows[0], "t,R[0][0]");
  EXPECT_EQ(rows[1], "0,1");
  // Trapezoid for R' = -R: (1 - h/2) / (1 + h/2) = 0.6 per step.
  EXPECT_NEAR(fields(rows[3])[1], 0.36, 1e-15);
}

TEST(Cli, Info) {
  const Outcome r = run("info " + spec("stress.json"));
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("d = 2, m = 1, q = 1, r = 1"), std::string::npos) << r.out;
  EXPECT_NE(r.out.find("kernel poles: (-2,0)"), std::string::npos) << r.out;
  EXPECT_NE(r.out.find("|mu|([-r,0])"), std::string::npos) << r.out;
}

TEST(Cli, DeterministicOutput) {
  const fs::path a = scratch("a.csv"), b = scratch("b.csv");
  ASSERT_EQ(run("simulate " + spec("stress.json") + " --step 0.01 --horizon 3 --out " + a.string()).code, 0);
  ASSERT_EQ(run("simulate " + spec("stress.json") + " --step 0.01 --horizon 3 --out " + b.string()).code, 0);
  const std::string first = slurp(a);
  EXPECT_FALSE(first.empty());
  EXPECT_EQ(first, slurp(b));
}

TEST(Cli, UsageErrorsExitOne) {
  for (const std::string& args :
       {std::string(""), std::string("simulate"), std::string("bogus"),
        "spectrum " + spec("critical_delay.json") + " --region 1,2",
        "spectrum " + spec("critical_delay.json") + " --region=-1,1,0,2 --grid 4",
        "simulate " + spec("steps.json") + " --method euler"}) {
    const Outcome r = run(args);
    EXPECT_EQ(r.code, 1) << args;
    EXPECT_EQ(r.err.rfind("error code=1 kind=usage", 0), 0u) << r.err;
    EXPECT_EQ(lines(r.err).size(), 1u) << r.err;
  }
}

TEST(Cli, InvalidSpecExitsTwo) {
  const fs::path bad = scratch("atom_at_zero.json");
  std::ofstream(bad) << R"({"d": 1, "A": [[0]], "L": {"r": 1, "atoms": [{"theta": 0, "M": [[1]]}]},
                           "x0": [1], "phi": {"constant": [1]}})";
  const Outcome r = run("simulate --spec " + bad.string());
  EXPECT_EQ(r.code, 2);
  EXPECT_EQ(r.err.rfind("error code=2 kind=spec field=L ", 0), 0u) << r.err;
  EXPECT_NE(r.err.find("measure must be continuous at 0"), std::string::npos) << r.err;
  EXPECT_EQ(lines(r.err).size(), 1u);

  const fs::path broken = scratch("broken.json");
  std::ofstream(broken) << "{\"d\": 1,\n \"A\": [[0]]\n";
  const Outcome p = run("info --spec " + broken.string());
  EXPECT_EQ(p.code, 2);
  EXPECT_NE(p.err.find("field=json"), std::string::npos) << p.err;
  EXPECT_NE(p.err.find("line "), std::string::npos) << p.err;
}

TEST(Cli, NumericalFailureExitsThree) {
  const Outcome r = run("simulate " + spec("steps.json") + " --step 0.3 --horizon 2");
  EXPECT_EQ(r.code, 3);
  EXPECT_EQ(r.err.rfind("error code=3 kind=numerical", 0), 0u) << r.err;
  EXPECT_TRUE(r.out.empty());
}
