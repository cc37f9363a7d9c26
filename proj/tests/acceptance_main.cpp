// Acceptance suite driver: one PASS/FAIL line per criterion, exit 0 iff all
// pass. Optional arguments select a subset by 1-based index.

#include <cstdlib>
#include <iostream>
#include <vector>

#include "ratiolab/bench.hpp"

#ifndef RATIOLAB_CLI_PATH
#define RATIOLAB_CLI_PATH ""
#endif

int main(int argc, char** argv) {
  ratiolab::BenchOptions opts;
  opts.cli_path = RATIOLAB_CLI_PATH;
  opts.scratch_dir = "acceptance_scratch";

  std::vector<int> wanted;
  for (int i = 1; i < argc; ++i) wanted.push_back(std::atoi(argv[i]) - 1);
  if (wanted.empty()) {
    for (int i = 0; i < ratiolab::acceptance_count(); ++i) wanted.push_back(i);
  }

  bool all = true;
  for (int idx : wanted) {
    const ratiolab::BenchResult res = ratiolab::run_acceptance_case(idx, opts);
    std::cout << ratiolab::format_acceptance_line(res) << std::endl;
    all = all && res.passed;
  }
  return all ? 0 : 1;
}
