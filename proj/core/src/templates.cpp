#include "gepa/templates.hpp"

#include <filesystem>
#include <fstream>
#include <sstream>

#include "gepa/error.hpp"

namespace gepa {

PromptTemplates PromptTemplates::defaults() {
  PromptTemplates t;
  t.critic_system =
      "You analyze an instruction prompt that is used to solve reasoning tasks. "
      "Diagnose why the model failed on the cases below and reply with a concise "
      "critique of the prompt's weaknesses.";
  t.critic_user =
      "Current prompt:\n{prompt}\n\nFailed cases:\n{errors}\n\n"
      "Identify why these failures happened and which instructions are missing or misleading.";
  t.critic_no_error_user =
      "Current prompt:\n{prompt}\n\nAll sampled cases passed. Representative successes:\n{successes}\n\n"
      "Critique the prompt for generality: identify instructions that would make it "
      "more robust on unseen cases, and redundancies that could be tightened.";
  t.evolve_system =
      "You rewrite instruction prompts. Output only the revised prompt text, with no "
      "commentary and no surrounding quotes.";
  t.evolve_user =
      "Current prompt:\n{prompt}\n\nCritique:\n{critique}\n\n"
      "Rewrite the prompt to address the critique. Output only the revised prompt.";
  return t;
}

namespace {

bool load_file_into(const std::string& path, std::string& target) {
  std::ifstream in(path, std::ios::binary);
  if (!in) return false;
  std::stringstream buffer;
  buffer << in.rdbuf();
  target = buffer.str();
  // Editors add a trailing newline; it is not part of the template.
  while (!target.empty() && (target.back() == '\n' || target.back() == '\r')) target.pop_back();
  return true;
}

}  // namespace

PromptTemplates PromptTemplates::load_dir(const std::string& dir) {
  if (!std::filesystem::is_directory(dir))
    raise(ErrorKind::config, "template directory '" + dir + "' does not exist");
  PromptTemplates t = defaults();
  load_file_into(dir + "/critic_system.txt", t.critic_system);
  load_file_into(dir + "/critic_user.txt", t.critic_user);
  load_file_into(dir + "/critic_no_error_user.txt", t.critic_no_error_user);
  load_file_into(dir + "/evolve_system.txt", t.evolve_system);
  load_file_into(dir + "/evolve_user.txt", t.evolve_user);
  return t;
}

std::string substitute(const std::string& tpl, const std::string& key, const std::string& value) {
  const std::string token = "{" + key + "}";
  std::string out = tpl;
  for (std::size_t pos = out.find(token); pos != std::string::npos; pos = out.find(token, pos)) {
    out.replace(pos, token.size(), value);
    pos += value.size();
  }
  return out;
}

}  // namespace gepa
