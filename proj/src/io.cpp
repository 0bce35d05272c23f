#include "fairmit/io.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

#include "fairmit/errors.hpp"

namespace fairmit {

namespace {

using nlohmann::json;

std::string lowercase(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(),
                 [](unsigned char c) { return std::tolower(c); });
  return s;
}

std::string trim(const std::string& s) {
  const auto begin = s.find_first_not_of(" \t\r");
  if (begin == std::string::npos) return "";
  const auto end = s.find_last_not_of(" \t\r");
  return s.substr(begin, end - begin + 1);
}

[[noreturn]] void row_error(std::size_t line, const std::string& field,
                            const std::string& what) {
  throw input_error("line " + std::to_string(line) + ", field '" + field +
                    "': " + what);
}

int parse_label(const std::string& raw, std::size_t line) {
  const std::string value = lowercase(trim(raw));
  if (value == "0" || value == "female") return kFemale;
  if (value == "1" || value == "male") return kMale;
  row_error(line, "label", "expected 0/1 or female/male, got '" + raw + "'");
}

double parse_score(const std::string& raw, std::size_t line) {
  const std::string value = trim(raw);
  double score = 0.0;
  std::size_t consumed = 0;
  try {
    score = std::stod(value, &consumed);
  } catch (const std::exception&) {
    row_error(line, "score", "not a number: '" + raw + "'");
  }
  if (consumed != value.size()) {
    row_error(line, "score", "not a number: '" + raw + "'");
  }
  if (!(score >= 0.0 && score <= 1.0)) {
    row_error(line, "score", "must lie in [0,1], got '" + raw + "'");
  }
  return score;
}

std::vector<std::string> split_csv_row(const std::string& line) {
  std::vector<std::string> fields;
  std::string current;
  for (char c : line) {
    if (c == ',') {
      fields.push_back(current);
      current.clear();
    } else {
      current += c;
    }
  }
  fields.push_back(current);
  return fields;
}

std::vector<ScoreRecord> load_scores_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw input_error("cannot open file: " + path.string());
  }
  std::string line;
  if (!std::getline(in, line)) {
    throw input_error("empty input");
  }
  if (!line.empty() && line.back() == '\r') line.pop_back();
  {
    auto header = split_csv_row(line);
    for (auto& h : header) h = lowercase(trim(h));
    if (header != std::vector<std::string>{"id", "label", "score"}) {
      throw input_error("expected header 'id,label,score' in " +
                        path.string());
    }
  }

  std::vector<ScoreRecord> records;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (trim(line).empty()) continue;
    const auto fields = split_csv_row(line);
    if (fields.size() != 3) {
      throw input_error("line " + std::to_string(line_no) +
                        ": expected 3 fields, got " +
                        std::to_string(fields.size()));
    }
    ScoreRecord rec;
    rec.id = trim(fields[0]);
    if (rec.id.empty()) {
      row_error(line_no, "id", "must not be empty");
    }
    rec.label = parse_label(fields[1], line_no);
    rec.score = parse_score(fields[2], line_no);
    records.push_back(std::move(rec));
  }
  if (records.empty()) {
    throw input_error("empty input");
  }
  return records;
}

std::vector<ScoreRecord> load_scores_jsonl(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw input_error("cannot open file: " + path.string());
  }
  std::vector<ScoreRecord> records;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    json obj;
    try {
      obj = json::parse(line);
    } catch (const json::exception& e) {
      throw input_error("line " + std::to_string(line_no) +
                        ": invalid JSON: " + e.what());
    }
    if (!obj.is_object()) {
      throw input_error("line " + std::to_string(line_no) +
                        ": expected a JSON object");
    }
    for (const char* key : {"id", "label", "score"}) {
      if (!obj.contains(key)) {
        row_error(line_no, key, "missing");
      }
    }
    ScoreRecord rec;
    if (obj["id"].is_string()) {
      rec.id = obj["id"].get<std::string>();
    } else if (obj["id"].is_number_integer()) {
      rec.id = std::to_string(obj["id"].get<long long>());
    } else {
      row_error(line_no, "id", "expected string or integer");
    }
    if (obj["label"].is_string()) {
      rec.label = parse_label(obj["label"].get<std::string>(), line_no);
    } else if (obj["label"].is_number_integer()) {
      const auto v = obj["label"].get<long long>();
      if (v != 0 && v != 1) {
        row_error(line_no, "label", "expected 0 or 1");
      }
      rec.label = static_cast<int>(v);
    } else {
      row_error(line_no, "label", "expected 0/1 or female/male");
    }
    if (!obj["score"].is_number()) {
      row_error(line_no, "score", "expected a number");
    }
    rec.score = obj["score"].get<double>();
    if (!(rec.score >= 0.0 && rec.score <= 1.0)) {
      row_error(line_no, "score", "must lie in [0,1]");
    }
    records.push_back(std::move(rec));
  }
  if (records.empty()) {
    throw input_error("empty input");
  }
  return records;
}

}  // namespace

std::vector<ScoreRecord> load_scores(const std::filesystem::path& path) {
  if (lowercase(path.extension().string()) == ".jsonl") {
    return load_scores_jsonl(path);
  }
  return load_scores_csv(path);
}

void save_scores_csv(const std::filesystem::path& path,
                     std::span<const ScoreRecord> records) {
  std::ofstream out(path);
  if (!out) {
    throw input_error("cannot open file for writing: " + path.string());
  }
  out << "id,label,score\n";
  out.precision(17);
  for (const auto& rec : records) {
    out << rec.id << ',' << rec.label << ',' << rec.score << '\n';
  }
  if (!out) {
    throw input_error("failed writing file: " + path.string());
  }
}

namespace {

std::vector<double> parse_pixels(const std::string& text, std::size_t expected,
                                 std::size_t line_no) {
  std::istringstream stream(text);
  std::vector<double> pixels;
  pixels.reserve(expected);
  double v = 0.0;
  while (stream >> v) {
    pixels.push_back(v);
  }
  if (!stream.eof()) {
    row_error(line_no, "pixels", "non-numeric pixel value");
  }
  if (pixels.size() != expected) {
    row_error(line_no, "pixels",
              "expected " + std::to_string(expected) + " values, got " +
                  std::to_string(pixels.size()));
  }
  return pixels;
}

bool looks_like_pixel_list(const std::string& text) {
  // A bare number is ambiguous; treat anything starting with a digit,
  // sign, or dot as inline data.
  if (text.empty()) return false;
  const char c = text.front();
  return (c >= '0' && c <= '9') || c == '-' || c == '+' || c == '.';
}

}  // namespace

Dataset load_dataset_dir(const std::filesystem::path& dir) {
  const auto meta_path = dir / "meta.json";
  std::ifstream meta_in(meta_path);
  if (!meta_in) {
    throw input_error("cannot open file: " + meta_path.string());
  }
  json meta;
  try {
    meta = json::parse(meta_in);
  } catch (const json::exception& e) {
    throw input_error("invalid meta.json: " + std::string(e.what()));
  }
  for (const char* key : {"height", "width", "channels", "count"}) {
    if (!meta.contains(key) || !meta[key].is_number_integer()) {
      throw input_error("meta.json missing integer field '" +
                        std::string(key) + "'");
    }
  }
  Dataset data;
  data.image_height = meta["height"].get<std::size_t>();
  data.image_width = meta["width"].get<std::size_t>();
  data.image_channels = meta["channels"].get<std::size_t>();
  const auto count = meta["count"].get<std::size_t>();
  if (data.image_height == 0 || data.image_width == 0 ||
      data.image_channels == 0) {
    throw input_error("meta.json dimensions must be positive");
  }
  const std::size_t pixel_count =
      data.image_height * data.image_width * data.image_channels;

  const auto index_path = dir / "index.csv";
  std::ifstream in(index_path);
  if (!in) {
    throw input_error("cannot open file: " + index_path.string());
  }
  std::string line;
  if (!std::getline(in, line)) {
    throw input_error("empty input");
  }
  if (!line.empty() && line.back() == '\r') line.pop_back();
  {
    auto header = split_csv_row(line);
    for (auto& h : header) h = lowercase(trim(h));
    if (header != std::vector<std::string>{"id", "label", "pixels"}) {
      throw input_error("expected header 'id,label,pixels' in " +
                        index_path.string());
    }
  }

  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (trim(line).empty()) continue;
    const auto fields = split_csv_row(line);
    if (fields.size() != 3) {
      throw input_error("line " + std::to_string(line_no) +
                        ": expected 3 fields, got " +
                        std::to_string(fields.size()));
    }
    data.labels.push_back(parse_label(fields[1], line_no));
    const std::string payload = trim(fields[2]);
    if (payload.empty()) {
      row_error(line_no, "pixels", "must not be empty");
    }
    if (looks_like_pixel_list(payload)) {
      data.features.push_back(parse_pixels(payload, pixel_count, line_no));
    } else {
      const auto pixel_path = dir / payload;
      std::ifstream pix_in(pixel_path);
      if (!pix_in) {
        row_error(line_no, "pixels",
                  "cannot open pixel file: " + pixel_path.string());
      }
      std::stringstream buffer;
      buffer << pix_in.rdbuf();
      data.features.push_back(parse_pixels(buffer.str(), pixel_count, line_no));
    }
  }
  if (data.size() == 0) {
    throw input_error("empty input");
  }
  if (data.size() != count) {
    throw input_error("meta.json count " + std::to_string(count) +
                      " does not match index rows " +
                      std::to_string(data.size()));
  }
  return data;
}

void save_dataset_dir(const std::filesystem::path& dir, const Dataset& data) {
  if (!data.is_image_data()) {
    throw input_error("dataset has no image shape");
  }
  const std::size_t pixel_count =
      data.image_height * data.image_width * data.image_channels;
  std::filesystem::create_directories(dir);

  {
    json meta;
    meta["height"] = data.image_height;
    meta["width"] = data.image_width;
    meta["channels"] = data.image_channels;
    meta["count"] = data.size();
    std::ofstream out(dir / "meta.json");
    if (!out) {
      throw input_error("cannot open file for writing: " +
                        (dir / "meta.json").string());
    }
    out << meta.dump(2) << '\n';
  }

  std::ofstream out(dir / "index.csv");
  if (!out) {
    throw input_error("cannot open file for writing: " +
                      (dir / "index.csv").string());
  }
  out << "id,label,pixels\n";
  out.precision(17);
  for (std::size_t i = 0; i < data.size(); ++i) {
    if (data.features[i].size() != pixel_count) {
      throw input_error("sample " + std::to_string(i) +
                        " has wrong pixel count");
    }
    out << i << ',' << data.labels[i] << ',';
    for (std::size_t p = 0; p < pixel_count; ++p) {
      if (p != 0) out << ' ';
      out << data.features[i][p];
    }
    out << '\n';
  }
  if (!out) {
    throw input_error("failed writing file: " + (dir / "index.csv").string());
  }
}

}  // namespace fairmit
