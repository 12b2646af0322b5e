// Acceptance gate: one PASS/FAIL line per criterion 1-12.

#include <sys/wait.h>

#include <chrono>
#include <cstdio>
#include <iostream>
#include <string>

#include "delaysys/verification.hpp"

namespace {

constexpr double kVerifyBudgetSeconds = 180.0;

delaysys::CriterionResult end_to_end() {
  const std::string specs = DELAYSYS_SPECS;
  std::string cmd = std::string(DELAYSYS_CLI) + " verify";
  for (const char* name : {"steps.json", "decay.json", "critical_delay.json", "stress.json"}) {
    cmd += " --spec " + specs + "/" + name;
  }
  cmd += " 2>&1";

  delaysys::CriterionResult r{12, "end-to-end verify", false, "", 0.0};
  const auto start = std::chrono::steady_clock::now();
  FILE* pipe = popen(cmd.c_str(), "r");
  if (!pipe) {
    r.detail = "cannot launch " + cmd;
    return r;
  }
  std::string output;
  char buf[4096];
  std::size_t n;
  while ((n = fread(buf, 1, sizeof buf, pipe)) > 0) output.append(buf, n);
  const int status = pclose(pipe);
  r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  const int code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  r.passed = code == 0 && r.seconds < kVerifyBudgetSeconds;
  r.detail = "exit=" + std::to_string(code) + " budget=" + std::to_string(static_cast<int>(kVerifyBudgetSeconds)) + "s";
  if (code != 0) {
    for (std::size_t pos = 0; pos < output.size();) {
      const std::size_t end = output.find('\n', pos);
      const std::string line = output.substr(pos, end - pos);
      if (line.rfind("FAIL", 0) == 0) r.detail += "; " + line;
      if (end == std::string::npos) break;
      pos = end + 1;
    }
  }
  return r;
}

}  // namespace

int main() {
  bool all = true;
  for (const delaysys::CriterionResult& r : delaysys::run_suite(&std::cout)) all = all && r.passed;
  const delaysys::CriterionResult last = end_to_end();
  std::cout << delaysys::format_result(last) << std::endl;
  all = all && last.passed;
  std::cout << (all ? "acceptance: all criteria passed" : "acceptance: some criteria failed") << std::endl;
  return all ? 0 : 1;
}
