#pragma once

#include <string>

namespace gepa {

// Meta-prompt templates for the critic and evolver calls. The wording is a
// placeholder convention, not a tuned artifact; ship-time defaults live in
// assets/templates and any field can be replaced by a user-supplied file.
// Placeholders: {prompt}, {errors}, {successes}, {critique}.
struct PromptTemplates {
  std::string critic_system;
  std::string critic_user;
  std::string critic_no_error_user;
  std::string evolve_system;
  std::string evolve_user;

  static PromptTemplates defaults();

  // Loads any template files present in `dir` (critic_system.txt, ...);
  // missing files keep their default text.
  static PromptTemplates load_dir(const std::string& dir);
};

// Replaces every occurrence of "{key}" in tpl.
std::string substitute(const std::string& tpl, const std::string& key, const std::string& value);

}  // namespace gepa
