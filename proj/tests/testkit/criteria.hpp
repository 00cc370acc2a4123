#pragma once

#include <string>

namespace testkit {

struct CheckResult {
  bool pass = false;
  std::string detail;
};

// Acceptance checks shared by the unit tests and the acceptance binary.
CheckResult extractionExactness();
CheckResult nonDuplication();
CheckResult extractionOracle(int rounds);
CheckResult classificationFixtures();
CheckResult intervalMerging(int rounds);
CheckResult aliasEndToEnd(int runs);
CheckResult modeEquivalence();
CheckResult wellFormedCorpus();
CheckResult assumptionChecks();
CheckResult viterbiCaseStudy();
CheckResult odeCaseStudy();
CheckResult nnCaseStudy();
// Speedup of programs/scale.pmx with `workers` lanes over one lane.
CheckResult scaling(int workers);

}  // namespace testkit
