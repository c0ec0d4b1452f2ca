#include <gtest/gtest.h>

#include <fstream>

#include "relay/benchmark_io.hpp"
#include "relay/errors.hpp"
#include "support.hpp"

namespace relay {
namespace {

std::filesystem::path data(const std::string& name) { return testing::data_dir() / name; }

TEST(LoadBenchmark, NativeRows) {
  auto load = load_benchmark(data("bench_4.jsonl"));
  ASSERT_EQ(load.tasks.size(), 4u);
  EXPECT_EQ(load.skipped, 0u);
  const auto& a = load.tasks[0];
  EXPECT_EQ(a.id, "b-1");
  EXPECT_EQ(a.options.size(), 4u);
  EXPECT_EQ(a.options[3].letter, 'D');
  EXPECT_EQ(a.options[3].text, "Cyperaceae");
  EXPECT_EQ(a.gold, 'D');
  EXPECT_EQ(a.meta.at("difficulty"), "hard");
  ASSERT_EQ(a.images.size(), 1u);
  EXPECT_EQ(std::filesystem::path(a.images[0].path),
            (testing::source_dir() / "fixtures/mini/images/mini-01.png").lexically_normal());
  EXPECT_EQ(load.tasks[1].options[1].text, "East");
  EXPECT_EQ(load.tasks[2].id, "3");
  EXPECT_TRUE(load.tasks[2].images.empty());
  EXPECT_EQ(load.tasks[2].meta.at("difficulty"), "2");
  EXPECT_FALSE(load.tasks[3].gold);
}

TEST(LoadBenchmark, DirectoryMeansTasksJsonl) {
  auto load = load_benchmark(testing::source_dir() / "fixtures" / "mini");
  EXPECT_EQ(load.tasks.size(), 10u);
  for (const auto& t : load.tasks) EXPECT_TRUE(t.gold) << t.id;
}

TEST(LoadBenchmark, BadGoldNamesTheRow) {
  try {
    load_benchmark(data("bad_gold.jsonl"));
    FAIL();
  } catch (const FormatError& e) {
    EXPECT_EQ(e.row(), 2u);
    EXPECT_NE(std::string(e.what()).find("gold"), std::string::npos);
  }
}

TEST(LoadBenchmark, MissingImageSkipsWithWarning) {
  auto load = load_benchmark(data("missing_image.jsonl"));
  ASSERT_EQ(load.tasks.size(), 1u);
  EXPECT_EQ(load.skipped, 1u);
  ASSERT_EQ(load.warnings.size(), 1u);
  EXPECT_NE(load.warnings[0].find("no-such-image.png"), std::string::npos);
}

TEST(LoadBenchmark, MmmuAdapter) {
  auto load = load_benchmark(data("mmmu_sample.jsonl"), "mmmu");
  ASSERT_EQ(load.tasks.size(), 2u);
  EXPECT_EQ(load.skipped, 1u);
  const auto& art = load.tasks[0];
  EXPECT_EQ(art.gold, 'C');
  EXPECT_EQ(art.images.size(), 1u);
  EXPECT_EQ(art.meta.at("benchmark"), "mmmu");
  EXPECT_EQ(art.meta.at("subfield"), "Art History");
  const auto& phys = load.tasks[1];
  ASSERT_EQ(phys.options.size(), 10u);
  EXPECT_EQ(phys.options.front().letter, 'A');
  EXPECT_EQ(phys.options.back().letter, 'J');
  EXPECT_EQ(phys.options.back().text, "the 10th one's");
  EXPECT_EQ(phys.gold, 'J');
  EXPECT_EQ(phys.images.size(), 2u);
}

TEST(LoadBenchmark, UnknownFormatAndMissingFile) {
  EXPECT_THROW(load_benchmark(data("bench_4.jsonl"), "csv"), std::invalid_argument);
  EXPECT_THROW(load_benchmark(data("nope.jsonl")), IoError);
  auto formats = benchmark_formats();
  EXPECT_EQ(formats, (std::vector<std::string>{"jsonl", "mmmu"}));
}

TEST(LoadBenchmark, MalformedJsonIsFormatError) {
  testing::TempDir dir;
  std::ofstream(dir / "t.jsonl") << R"({"id": "a", "question": "q", "options": ["x", "y"]})" << "\n{oops\n";
  try {
    load_benchmark(dir / "t.jsonl");
    FAIL();
  } catch (const FormatError& e) {
    EXPECT_EQ(e.row(), 2u);
  }
  std::ofstream(dir / "d.jsonl") << R"({"id": "a", "question": "q", "options": ["x", "y"]})" << "\n"
                                 << R"({"id": "a", "question": "q", "options": ["x", "y"]})" << "\n";
  EXPECT_THROW(load_benchmark(dir / "d.jsonl"), FormatError);
}

TEST(ParseStringList, PythonLiterals) {
  EXPECT_EQ(parse_string_list("['a', \"b\", 'c\\'d']"), (std::vector<std::string>{"a", "b", "c'd"}));
  EXPECT_EQ(parse_string_list("  [ ]  "), std::vector<std::string>{});
  EXPECT_EQ(parse_string_list("['x, y']"), std::vector<std::string>{"x, y"});
  EXPECT_THROW(parse_string_list("a, b"), std::invalid_argument);
  EXPECT_THROW(parse_string_list("['a' 'b']"), std::invalid_argument);
  EXPECT_THROW(parse_string_list("['a]"), std::invalid_argument);
}

TEST(MetaFilter, ClausesAndAlternatives) {
  auto tasks = load_benchmark(data("bench_4.jsonl")).tasks;
  EXPECT_EQ(filter_tasks(tasks, MetaFilter::parse("")).size(), 4u);
  EXPECT_EQ(filter_tasks(tasks, MetaFilter::parse("subject=biology")).size(), 1u);
  EXPECT_EQ(filter_tasks(tasks, MetaFilter::parse("subject=biology|charts")).size(), 2u);
  EXPECT_EQ(filter_tasks(tasks, MetaFilter::parse("subject=biology|charts, difficulty=easy")).size(), 1u);
  EXPECT_EQ(filter_tasks(tasks, MetaFilter::parse("nosuchkey=1")).size(), 0u);
  EXPECT_TRUE(MetaFilter::parse(" , ").empty());
  EXPECT_THROW(MetaFilter::parse("subject"), std::invalid_argument);
  EXPECT_THROW(MetaFilter::parse("=x"), std::invalid_argument);
}

}  // namespace
}  // namespace relay
