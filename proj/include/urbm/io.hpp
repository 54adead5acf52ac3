#pragma once

#include <string>
#include <vector>

#include "json.hpp"

namespace urbm::io {

// Decimal text with 17 significant digits (round-trips any double).
std::string format_double(double v);

void write_text_file(const std::string& path, const std::string& content);

// Header row + data rows, comma-separated, LF line endings.
std::string csv_text(const std::vector<std::string>& header,
                     const std::vector<std::vector<std::string>>& rows);

std::string sha256_hex(const std::string& bytes);

// Collects one run's output files under a directory, then finalizes with
// metadata.json and a manifest.json listing every emitted file (name, content
// hash, size) exactly once. The manifest itself is not self-listed.
class RunWriter {
 public:
  explicit RunWriter(std::string dir);  // creates the directory if needed

  const std::string& dir() const { return dir_; }
  nlohmann::json& metadata() { return metadata_; }

  void csv(const std::string& name, const std::vector<std::string>& header,
           const std::vector<std::vector<std::string>>& rows);
  void text(const std::string& name, const std::string& content);
  void json_file(const std::string& name, const nlohmann::json& j);
  void jsonl(const std::string& name, const std::vector<nlohmann::json>& lines);

  void finalize();

 private:
  void emit(const std::string& name, const std::string& content);

  std::string dir_;
  std::vector<std::string> files_;
  nlohmann::json metadata_;
  bool finalized_ = false;
};

}  // namespace urbm::io
