// Acceptance gate: one pass/fail line per criterion; exit 0 iff all pass.

#include <cstdlib>
#include <iostream>
#include <string>
#include <thread>

#include "hocs/acceptance.hpp"

int main(int argc, char** argv) {
  int workers = static_cast<int>(std::thread::hardware_concurrency());
  if (workers < 1) workers = 4;
  if (argc > 1) workers = std::atoi(argv[1]);
  std::string scratch = "acceptance_scratch";
  if (argc > 2) scratch = argv[2];

  auto results = hocs::run_acceptance(workers, scratch, std::cout);
  bool all = true;
  for (const auto& r : results) all = all && r.passed;
  std::cout << (all ? "ALL CRITERIA PASSED" : "CRITERIA FAILED") << "\n";
  return all ? 0 : 1;
}
