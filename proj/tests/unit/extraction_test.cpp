// Answer-extraction fixture suite: marked answers, parenthesized fallbacks,
// absent answers, adversarial restatements.

#include <string>

#include "doctest.h"
#include "gepa/evaluation.hpp"
#include "test_support.hpp"

using namespace gepa;

namespace {

const std::vector<std::string> kLabels = {"A", "B", "C", "D"};

std::string got(const std::string& completion) {
  const auto result = extract_final_answer(completion, kLabels);
  return result.has_value() ? *result : "<absent>";
}

}  // namespace

TEST_CASE("marked answers") {
  CHECK(got("Final answer: C") == "C");
  CHECK(got("final answer: c") == "<absent>");  // labels are exact tokens
  CHECK(got("The final answer is irrelevant. Answer: B") == "B");
  CHECK(got("ANSWER D") == "D");
  CHECK(got("answer:A") == "A");
  CHECK(got("Final answer: (B)") == "B");
  CHECK(got("Answer:\n\nC") == "C");
  CHECK(got("My answer - D") == "<absent>");  // dash is not in the separator set
}

TEST_CASE("last marked occurrence wins") {
  CHECK(got("… so the answer is (B). Final answer: D") == "D");
  CHECK(got("Answer: A. Wait, no. Answer: B") == "B");
  CHECK(got("Final answer: C\nFinal answer: A") == "A");
  CHECK(got("answer (A) then later answer (D)") == "D");
}

TEST_CASE("parenthesized fallback") {
  CHECK(got("The reaction yields (C)") == "C");
  CHECK(got("Options (A) and (B) considered; settled on (D)") == "D");
  CHECK(got("(A)") == "A");
  CHECK(got("see (E) and (f)") == "<absent>");  // not valid labels
}

TEST_CASE("absent answers") {
  CHECK(got("The answer is unclear") == "<absent>");
  CHECK(got("") == "<absent>");
  CHECK(got("answers: C") == "<absent>");  // 'answers' is not the marker word
  CHECK(got("no conclusion reached") == "<absent>");
}

TEST_CASE("adversarial restatements") {
  CHECK(got("Final answer: Delta") == "<absent>");        // label must be bounded
  CHECK(got("the answer to part (b)... Final answer: A") == "A");
  CHECK(got("Answer: AB") == "<absent>");                 // two letters is not a label
  CHECK(got("The band ABBA is not an answer") == "<absent>");
  CHECK(got("answer is B") == "<absent>");                // 'is' breaks the marked grammar
  CHECK(got("answer is B, i.e. (B)") == "B");             // the fallback still applies
  CHECK(got("Answer: C99") == "<absent>");                // trailing alphanumerics unbind the label
  CHECK(got("Final answer:D.") == "D");
}

TEST_CASE("extraction is total and idempotent on arbitrary input") {
  const std::string junk(512, '\xff');
  CHECK(got(junk) == "<absent>");
  std::string big;
  big.reserve(3u << 20);
  while (big.size() < (3u << 20)) big += "filler text with answer-like words answering nothing; ";
  big += "Final answer: B";
  CHECK(got(big) == "B");
  CHECK(got(big) == "B");  // idempotent
}

TEST_CASE("check_answer maps extraction onto score and failure detail") {
  TaskInstance inst;
  inst.id = "g";
  inst.task = Task::gpqa;
  inst.statement = "pick";
  inst.choices = {{"A", "x"}, {"B", "y"}, {"C", "z"}, {"D", "w"}};
  inst.answer_key = "C";

  const GradedAnswer right = check_answer("Final answer: C", inst);
  CHECK(right.score == 1);
  CHECK_FALSE(right.failure.has_value());

  const GradedAnswer wrong = check_answer("Final answer: A", inst);
  CHECK(wrong.score == 0);
  REQUIRE(wrong.failure.has_value());
  CHECK(wrong.failure->reason == FailureReason::wrong_answer);

  const GradedAnswer absent = check_answer("The answer is unclear", inst);
  CHECK(absent.score == 0);
  REQUIRE(absent.failure.has_value());
  CHECK(absent.failure->reason == FailureReason::no_answer_found);
}
