#include "relay/benchmark_io.hpp"

#include <algorithm>
#include <fstream>
#include <functional>
#include <stdexcept>

#include "json_codec.hpp"
#include "relay/errors.hpp"

namespace relay {

namespace {

struct RowContext {
  std::filesystem::path base_dir;
  BenchmarkLoad* load;
  std::size_t row;
};

// Returns false when the row should be skipped.
using Adapter = std::function<bool(const json&, TaskInstance&, RowContext&)>;

std::string trim(const std::string& s) {
  auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::string scalar_string(const json& j) {
  if (j.is_string()) return j.get<std::string>();
  if (j.is_number_integer()) return std::to_string(j.get<long long>());
  return j.dump();
}

bool resolve_images(TaskInstance& task, RowContext& ctx) {
  for (auto& img : task.images) {
    std::filesystem::path p(img.path);
    if (p.is_relative()) p = ctx.base_dir / p;
    if (!std::filesystem::is_regular_file(p)) {
      ++ctx.load->skipped;
      ctx.load->warnings.push_back("row " + std::to_string(ctx.row) + ": missing image " + p.string());
      return false;
    }
    img.path = p.lexically_normal().generic_string();
  }
  return true;
}

bool native_row(const json& j, TaskInstance& t, RowContext& ctx) {
  t.id = scalar_string(j.at("id"));
  t.question = j.at("question").get<std::string>();
  const json& opts = j.at("options");
  if (!opts.is_array()) throw std::invalid_argument("options must be an array");
  if (!opts.empty() && opts.front().is_string()) {
    t.options = letter_options(opts.get<std::vector<std::string>>());
    if (opts.size() > kMaxOptions) throw std::invalid_argument("at most 26 options allowed");
  } else {
    t.options = opts.get<std::vector<OptionEntry>>();
  }
  t.images = j.value("images", std::vector<ImageRef>{});
  t.gold = j.contains("gold") ? letter_from(j.at("gold")) : std::nullopt;
  if (j.contains("meta")) {
    for (const auto& [k, v] : j.at("meta").items()) t.meta[k] = scalar_string(v);
  }
  return resolve_images(t, ctx);
}

bool mmmu_row(const json& j, TaskInstance& t, RowContext& ctx) {
  t.id = scalar_string(j.at("id"));
  if (j.value("question_type", std::string("multiple-choice")) != "multiple-choice") {
    ++ctx.load->skipped;
    ctx.load->warnings.push_back("row " + std::to_string(ctx.row) + ": " + t.id + " is not multiple choice");
    return false;
  }
  t.question = j.at("question").get<std::string>();
  const json& opts = j.at("options");
  std::vector<std::string> texts =
      opts.is_array() ? opts.get<std::vector<std::string>>() : parse_string_list(opts.get<std::string>());
  if (texts.size() > kMaxOptions) throw std::invalid_argument("at most 26 options allowed");
  t.options = letter_options(texts);
  for (int i = 1; i <= 7; ++i) {
    auto key = "image_" + std::to_string(i);
    if (j.contains(key) && !j[key].is_null()) t.images.push_back({j[key].get<std::string>()});
  }
  if (j.contains("answer") && !j["answer"].is_null()) t.gold = letter_from(j["answer"]);
  t.meta["benchmark"] = "mmmu";
  for (const char* key : {"subject", "subfield", "topic_difficulty", "split"}) {
    if (j.contains(key) && !j[key].is_null()) t.meta[key] = scalar_string(j[key]);
  }
  return resolve_images(t, ctx);
}

const std::map<std::string, Adapter>& adapters() {
  static const std::map<std::string, Adapter> kAdapters = {{"jsonl", native_row}, {"mmmu", mmmu_row}};
  return kAdapters;
}

}  // namespace

std::vector<std::string> benchmark_formats() {
  std::vector<std::string> out;
  for (const auto& [name, _] : adapters()) out.push_back(name);
  return out;
}

std::vector<std::string> parse_string_list(const std::string& text) {
  std::string s = trim(text);
  if (s.size() < 2 || s.front() != '[' || s.back() != ']') throw std::invalid_argument("expected a bracketed list");
  std::vector<std::string> out;
  std::size_t i = 1;
  const std::size_t end = s.size() - 1;
  auto skip_ws = [&] {
    while (i < end && std::isspace(static_cast<unsigned char>(s[i]))) ++i;
  };
  skip_ws();
  while (i < end) {
    char quote = s[i];
    if (quote != '\'' && quote != '"') throw std::invalid_argument("expected a quoted string in list");
    ++i;
    std::string item;
    bool closed = false;
    while (i < end) {
      char c = s[i++];
      if (c == '\\' && i < end) {
        char n = s[i++];
        switch (n) {
          case 'n': item += '\n'; break;
          case 't': item += '\t'; break;
          default: item += n;
        }
      } else if (c == quote) {
        closed = true;
        break;
      } else {
        item += c;
      }
    }
    if (!closed) throw std::invalid_argument("unterminated string in list");
    out.push_back(std::move(item));
    skip_ws();
    if (i < end) {
      if (s[i] != ',') throw std::invalid_argument("expected ',' between list items");
      ++i;
      skip_ws();
    }
  }
  return out;
}

BenchmarkLoad load_benchmark(const std::filesystem::path& path, const std::string& format) {
  auto it = adapters().find(format);
  if (it == adapters().end()) throw std::invalid_argument("unknown benchmark format '" + format + "'");
  std::filesystem::path file = std::filesystem::is_directory(path) ? path / "tasks.jsonl" : path;
  std::ifstream in(file, std::ios::binary);
  if (!in) throw IoError("cannot read benchmark " + file.string());

  BenchmarkLoad load;
  RowContext ctx{file.parent_path(), &load, 0};
  std::string line;
  while (std::getline(in, line)) {
    ++ctx.row;
    if (trim(line).empty()) continue;
    TaskInstance task;
    try {
      if (!it->second(json::parse(line), task, ctx)) continue;
    } catch (const std::exception& e) {
      throw FormatError(file.string(), ctx.row, e.what());
    }
    auto problems = validate_task(task);
    if (!problems.empty()) throw FormatError(file.string(), ctx.row, problems.front().field + ": " + problems.front().rule);
    load.tasks.push_back(std::move(task));
  }
  auto problems = validate_task_set(load.tasks);
  if (!problems.empty()) throw FormatError(file.string(), 0, problems.front().field + ": " + problems.front().rule);
  return load;
}

MetaFilter MetaFilter::parse(const std::string& expr) {
  MetaFilter f;
  std::size_t start = 0;
  while (start <= expr.size()) {
    auto comma = expr.find(',', start);
    std::string clause = trim(expr.substr(start, comma == std::string::npos ? std::string::npos : comma - start));
    if (!clause.empty()) {
      auto eq = clause.find('=');
      if (eq == std::string::npos) throw std::invalid_argument("filter clause needs key=value: " + clause);
      std::string key = trim(clause.substr(0, eq));
      if (key.empty()) throw std::invalid_argument("filter clause has an empty key: " + clause);
      auto& values = f.clauses_[key];
      std::string rest = clause.substr(eq + 1);
      std::size_t vs = 0;
      while (vs <= rest.size()) {
        auto bar = rest.find('|', vs);
        values.push_back(trim(rest.substr(vs, bar == std::string::npos ? std::string::npos : bar - vs)));
        if (bar == std::string::npos) break;
        vs = bar + 1;
      }
    }
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return f;
}

bool MetaFilter::matches(const TaskInstance& task) const {
  for (const auto& [key, values] : clauses_) {
    auto it = task.meta.find(key);
    if (it == task.meta.end()) return false;
    if (std::find(values.begin(), values.end(), it->second) == values.end()) return false;
  }
  return true;
}

std::vector<TaskInstance> filter_tasks(const std::vector<TaskInstance>& tasks, const MetaFilter& filter) {
  std::vector<TaskInstance> out;
  std::copy_if(tasks.begin(), tasks.end(), std::back_inserter(out),
               [&](const TaskInstance& t) { return filter.matches(t); });
  return out;
}

}  // namespace relay
