#include "support.hpp"

#include <atomic>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "relay/benchmark_io.hpp"
#include "relay/evaluation.hpp"

namespace relay::testing {

std::filesystem::path source_dir() { return RELAY_SOURCE_DIR; }
std::filesystem::path data_dir() { return source_dir() / "tests" / "data"; }
std::filesystem::path golden_dir() { return source_dir() / "tests" / "golden"; }

TempDir::TempDir() {
  static std::atomic<unsigned> counter{0};
  std::random_device rd;
  path_ = std::filesystem::temp_directory_path() /
          ("relay-test-" + std::to_string(rd()) + "-" + std::to_string(counter++));
  std::filesystem::create_directories(path_);
}

TempDir::~TempDir() {
  std::error_code ec;
  std::filesystem::remove_all(path_, ec);
}

EndpointConfig endpoint(const std::string& name, bool vision, bool thinking) {
  EndpointConfig e;
  e.name = name;
  e.base_url = "http://mock";
  e.model_id = name + "-model";
  e.supports_vision = vision;
  e.supports_thinking = thinking;
  return e;
}

std::vector<TaskInstance> mini_tasks() {
  auto load = load_benchmark(source_dir() / "fixtures" / "mini", "jsonl");
  for (auto& t : load.tasks) {
    for (auto& img : t.images) {
      img.path = std::filesystem::path(img.path).lexically_relative(source_dir()).generic_string();
    }
  }
  return load.tasks;
}

std::shared_ptr<const MockScript> demo_script() {
  return std::make_shared<MockScript>(MockScript::load(source_dir() / "mocks" / "demo.mock"));
}

BackendMap demo_backends() {
  auto script = demo_script();
  BackendMap out;
  out["perceiver"] = std::make_shared<MockBackend>(endpoint("perceiver", true), script);
  out["reasoner"] = std::make_shared<MockBackend>(endpoint("reasoner", false, true), script);
  out["reasoner_vision"] = std::make_shared<MockBackend>(endpoint("reasoner_vision", true, true), script);
  return out;
}

std::string reference_text() {
  std::ifstream in(source_dir() / "paper.md", std::ios::binary);
  if (!in) throw std::runtime_error("paper.md not found");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string reference_excerpt(const std::string& from, const std::string& to) {
  std::istringstream in(reference_text());
  std::string line;
  while (std::getline(in, line)) {
    auto a = line.find(from);
    if (a == std::string::npos) continue;
    auto b = line.find(to, a);
    if (b == std::string::npos) throw std::runtime_error("excerpt end not found: " + to);
    std::string raw = line.substr(a, b + to.size() - a);
    std::string out;
    for (std::size_t i = 0; i < raw.size(); ++i) {
      bool skipped = false;
      for (std::string_view macro : {"\\hlred{", "\\hlgreen{", "\\textbf{"}) {
        if (raw.compare(i, macro.size(), macro) == 0) {
          i += macro.size() - 1;
          skipped = true;
          break;
        }
      }
      if (skipped || raw[i] == '}') continue;
      out += raw[i];
    }
    return out;
  }
  throw std::runtime_error("excerpt start not found: " + from);
}

std::vector<OptionEntry> options_through(char last) {
  std::vector<OptionEntry> out;
  for (char c = 'A'; c <= last; ++c) out.push_back({c, std::string("option ") + c});
  return out;
}

TaskInstance synthetic_task(const std::string& id, std::size_t n_options, std::size_t n_images, char gold) {
  TaskInstance t;
  t.id = id;
  t.question = "Synthetic question " + id + "?";
  t.options = options_through(static_cast<char>('A' + n_options - 1));
  for (std::size_t i = 0; i < n_images; ++i) t.images.push_back({"img/" + id + "-" + std::to_string(i) + ".png"});
  t.gold = gold;
  return t;
}

}  // namespace relay::testing
