#include "relay/prompts.hpp"

#include <fstream>
#include <regex>
#include <sstream>
#include <stdexcept>

#include "relay/errors.hpp"

namespace relay {

namespace {

constexpr const char* kSingleModel =
    "Answer the preceding multiple choice question. The last line of your response should be of the "
    "following format: \"Answer: $LETTER\" (without quotes) where LETTER is one of the options. Think "
    "step by step before answering.";

constexpr const char* kPerceiverSystem =
    "Your task is to answer a given multiple choice question about an image with the help of the "
    "expert. The expert does not have access to the question, the options, or the image, so you should "
    "state the exact question and the options, and provide a detailed description of the image to the "
    "expert.";

constexpr const char* kReasonerSystem =
    "Your task is to help the client answer a multiple choice question about an image. Only the client "
    "have access to the question, the options, and the image, so you should try to gather from the "
    "client as much information as needed to answer the question. Make sure you fully understand the "
    "question and verify details about the image that may be relevant to each option before answering "
    "the question.";

constexpr const char* kOpener =
    "Hi, I'm the expert here. I heard you have a multiple choice question about an image and I can "
    "help you with that. Could you state the exact question, the options, and provide a detailed "
    "description of the image?";

constexpr const char* kExtraction =
    "Now it's time to write the final answer. Your response should be of the following format: "
    "\"Answer: $LETTER\" (without quotes) where LETTER is one of the options.";

constexpr const char* kQuestionTemplate = "{question}\n\nOptions:\n{options}";

constexpr const char* kSingleTurnPerceiverSystem =
    "Your task is to answer a given multiple choice question about an image with the help of the "
    "expert. The expert does not have access to the question, the options, or the image. You can send "
    "the expert only one message, so in that message state the exact question and the options, and "
    "communicate all relevant visual information: describe every detail of the image that could matter "
    "for any of the options.";

constexpr const char* kSingleTurnReasonerSystem =
    "Your task is to help the client answer a multiple choice question about an image. Only the client "
    "have access to the question, the options, and the image. The client will send you a single message "
    "with the question, the options, and a description of the image, and you cannot ask follow-up "
    "questions, so reason carefully over the information given and then answer the question.";

std::string read_file(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw IoError("cannot read " + p.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

const std::vector<PromptFile> kPromptFiles = {
    {"single_model.txt", &PromptSet::single_model_prompt},
    {"perceiver_system.txt", &PromptSet::perceiver_system},
    {"reasoner_system.txt", &PromptSet::reasoner_system},
    {"opener.txt", &PromptSet::opener},
    {"extraction.txt", &PromptSet::extraction_prompt},
    {"question.txt", &PromptSet::question_template},
    {"single_turn_perceiver_system.txt", &PromptSet::single_turn_perceiver_system},
    {"single_turn_reasoner_system.txt", &PromptSet::single_turn_reasoner_system},
};

PromptSet default_prompt_set() {
  return PromptSet{
      .single_model_prompt = kSingleModel,
      .perceiver_system = kPerceiverSystem,
      .reasoner_system = kReasonerSystem,
      .opener = kOpener,
      .extraction_prompt = kExtraction,
      .question_template = kQuestionTemplate,
      .single_turn_perceiver_system = kSingleTurnPerceiverSystem,
      .single_turn_reasoner_system = kSingleTurnReasonerSystem,
  };
}

PromptSet load_prompt_set(const std::filesystem::path& dir) {
  if (!std::filesystem::is_directory(dir)) throw IoError("prompt directory not found: " + dir.string());
  PromptSet prompts = default_prompt_set();
  for (const auto& f : kPromptFiles) {
    auto p = dir / f.file_name;
    if (!std::filesystem::exists(p)) continue;
    std::string text = read_file(p);
    // A single trailing newline is an editor artifact, not template content.
    if (!text.empty() && text.back() == '\n') text.pop_back();
    if (text.empty()) throw ConfigError("empty prompt template: " + p.string());
    prompts.*(f.field) = std::move(text);
  }
  return prompts;
}

void write_prompt_set(const PromptSet& prompts, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  for (const auto& f : kPromptFiles) {
    std::ofstream out(dir / f.file_name, std::ios::binary);
    if (!out) throw IoError("cannot write " + (dir / f.file_name).string());
    out << prompts.*(f.field) << '\n';
  }
}

std::string render_options(const TaskInstance& task) {
  std::string out;
  for (std::size_t i = 0; i < task.options.size(); ++i) {
    if (i) out += '\n';
    out += task.options[i].letter;
    out += ". ";
    out += task.options[i].text;
  }
  return out;
}

std::vector<std::string> unfilled_placeholders(const std::string& text) {
  static const std::regex kPlaceholder(R"(\{([A-Za-z_][A-Za-z0-9_]*)\})");
  std::vector<std::string> names;
  for (auto it = std::sregex_iterator(text.begin(), text.end(), kPlaceholder); it != std::sregex_iterator(); ++it) {
    names.push_back((*it)[1].str());
  }
  return names;
}

std::string render_question(const std::string& tmpl, const TaskInstance& task) {
  // Substitute in one pass over the template so braces inside task text are
  // never reinterpreted.
  std::string out;
  std::size_t pos = 0;
  while (pos < tmpl.size()) {
    auto open = tmpl.find('{', pos);
    if (open == std::string::npos) break;
    auto close = tmpl.find_first_of("{}", open + 1);
    if (close == std::string::npos) break;
    out.append(tmpl, pos, open - pos);
    if (tmpl[close] == '{') {
      out += '{';
      pos = open + 1;
      continue;
    }
    std::string_view name(tmpl.data() + open + 1, close - open - 1);
    if (name == "question") {
      out += task.question;
    } else if (name == "options") {
      out += render_options(task);
    } else if (!unfilled_placeholders(std::string(tmpl, open, close - open + 1)).empty()) {
      throw std::invalid_argument("unknown placeholder {" + std::string(name) + "} in question template");
    } else {
      out.append(tmpl, open, close - open + 1);
    }
    pos = close + 1;
  }
  out.append(tmpl, pos);
  return out;
}

}  // namespace relay
