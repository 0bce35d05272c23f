#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <string>

#include <doctest.h>

#include "fairmit/errors.hpp"
#include "fairmit/io.hpp"

using namespace fairmit;

namespace {

namespace fs = std::filesystem;

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() /
           ("fairmit_io_test_" + std::to_string(std::rand()));
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

void write_file(const fs::path& path, const std::string& text) {
  std::ofstream out(path);
  out << text;
}

std::string error_text(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const input_error& e) {
    return e.what();
  }
  return "";
}

}  // namespace

TEST_CASE("score CSV parses ids, label aliases, and scores") {
  TempDir dir;
  const auto path = dir.path / "scores.csv";
  write_file(path,
             "id,label,score\n"
             "a,1,0.9\n"
             "b,male,0.8\n"
             "c,0,0.2\n"
             "d,Female,0.1\n");
  const auto records = load_scores(path);
  REQUIRE(records.size() == 4);
  CHECK(records[0].id == "a");
  CHECK(records[0].label == kMale);
  CHECK(records[1].label == kMale);
  CHECK(records[2].label == kFemale);
  CHECK(records[3].label == kFemale);
  CHECK(records[0].score == doctest::Approx(0.9));
  CHECK(records[3].score == doctest::Approx(0.1));
}

TEST_CASE("CSV and JSONL encodings load identically") {
  TempDir dir;
  const auto csv = dir.path / "scores.csv";
  const auto jsonl = dir.path / "scores.jsonl";
  write_file(csv,
             "id,label,score\n"
             "x1,male,0.75\n"
             "x2,female,0.25\n"
             "x3,1,0.5\n");
  write_file(jsonl,
             "{\"id\": \"x1\", \"label\": \"male\", \"score\": 0.75}\n"
             "{\"id\": \"x2\", \"label\": 0, \"score\": 0.25}\n"
             "{\"id\": \"x3\", \"label\": 1, \"score\": 0.5}\n");
  const auto a = load_scores(csv);
  const auto b = load_scores(jsonl);
  REQUIRE(a.size() == b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(a[i].id == b[i].id);
    CHECK(a[i].label == b[i].label);
    CHECK(a[i].score == b[i].score);
  }
}

TEST_CASE("malformed score rows cite the line and field") {
  TempDir dir;
  const auto path = dir.path / "bad.csv";
  write_file(path,
             "id,label,score\n"
             "a,male,0.5\n"
             "b,male,0.6\n"
             "c,male,0.7\n"
             "d,male,1.2\n");
  const std::string message = error_text([&] { load_scores(path); });
  CHECK(message.find("line 5") != std::string::npos);
  CHECK(message.find("score") != std::string::npos);

  write_file(path,
             "id,label,score\n"
             "a,alien,0.5\n");
  const std::string label_message = error_text([&] { load_scores(path); });
  CHECK(label_message.find("line 2") != std::string::npos);
  CHECK(label_message.find("label") != std::string::npos);
}

TEST_CASE("score files with a bad header or no rows are rejected") {
  TempDir dir;
  const auto path = dir.path / "scores.csv";
  write_file(path, "id,label,score\n");
  CHECK_THROWS_WITH_AS(load_scores(path), "empty input", input_error);
  write_file(path, "identifier,label,score\na,1,0.5\n");
  CHECK_THROWS_AS(load_scores(path), input_error);
}

TEST_CASE("jsonl rejects malformed lines with their line number") {
  TempDir dir;
  const auto path = dir.path / "scores.jsonl";
  write_file(path,
             "{\"id\": \"a\", \"label\": 1, \"score\": 0.5}\n"
             "{\"id\": \"b\", \"label\": 1}\n");
  const std::string message = error_text([&] { load_scores(path); });
  CHECK(message.find("line 2") != std::string::npos);
  CHECK(message.find("score") != std::string::npos);
}

TEST_CASE("saved scores read back equal") {
  TempDir dir;
  const std::vector<ScoreRecord> records = {
      {"a", kMale, 0.125}, {"b", kFemale, 0.7371928371}};
  const auto path = dir.path / "out.csv";
  save_scores_csv(path, records);
  const auto loaded = load_scores(path);
  REQUIRE(loaded.size() == 2);
  CHECK(loaded[0].id == "a");
  CHECK(loaded[0].score == records[0].score);
  CHECK(loaded[1].score == records[1].score);
}

TEST_CASE("dataset directories round trip") {
  TempDir dir;
  Dataset data;
  data.image_height = 2;
  data.image_width = 2;
  data.image_channels = 1;
  data.features = {{0.1, 0.2, 0.3, 0.4}, {0.9, 0.8, 0.7, 0.6}};
  data.labels = {kFemale, kMale};

  const auto out = dir.path / "set";
  save_dataset_dir(out, data);
  const Dataset loaded = load_dataset_dir(out);
  CHECK(loaded.image_height == 2);
  CHECK(loaded.image_width == 2);
  CHECK(loaded.image_channels == 1);
  CHECK(loaded.labels == data.labels);
  CHECK(loaded.features == data.features);
}

TEST_CASE("dataset index rows may point at pixel files") {
  TempDir dir;
  write_file(dir.path / "meta.json",
             "{\"height\": 1, \"width\": 2, \"channels\": 1, \"count\": 2}");
  write_file(dir.path / "img0.txt", "0.25 0.75");
  write_file(dir.path / "index.csv",
             "id,label,pixels\n"
             "0,female,img0.txt\n"
             "1,male,0.5 0.5\n");
  const Dataset loaded = load_dataset_dir(dir.path);
  REQUIRE(loaded.size() == 2);
  CHECK(loaded.features[0] == std::vector<double>{0.25, 0.75});
  CHECK(loaded.features[1] == std::vector<double>{0.5, 0.5});
  CHECK(loaded.labels == std::vector<int>{kFemale, kMale});
}

TEST_CASE("dataset loader reports pixel-count mismatches by line") {
  TempDir dir;
  write_file(dir.path / "meta.json",
             "{\"height\": 1, \"width\": 2, \"channels\": 1, \"count\": 1}");
  write_file(dir.path / "index.csv",
             "id,label,pixels\n"
             "0,female,0.5 0.5 0.5\n");
  const std::string message =
      error_text([&] { load_dataset_dir(dir.path); });
  CHECK(message.find("line 2") != std::string::npos);
  CHECK(message.find("pixels") != std::string::npos);
}

TEST_CASE("dataset loader checks the meta count") {
  TempDir dir;
  write_file(dir.path / "meta.json",
             "{\"height\": 1, \"width\": 1, \"channels\": 1, \"count\": 3}");
  write_file(dir.path / "index.csv",
             "id,label,pixels\n"
             "0,female,0.5\n");
  CHECK_THROWS_AS(load_dataset_dir(dir.path), input_error);
}
