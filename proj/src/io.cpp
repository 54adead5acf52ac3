#include "urbm/io.hpp"

#include <openssl/evp.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <stdexcept>
#include <utility>

namespace urbm::io {

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  out.write(content.data(), std::streamsize(content.size()));
  if (!out) throw std::runtime_error("write failed: " + path);
}

std::string csv_text(const std::vector<std::string>& header,
                     const std::vector<std::vector<std::string>>& rows) {
  std::string out;
  auto line = [&out](const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (i != 0) out += ',';
      out += cells[i];
    }
    out += '\n';
  };
  line(header);
  for (const auto& row : rows) {
    if (row.size() != header.size())
      throw std::invalid_argument("csv row width does not match the header");
    line(row);
  }
  return out;
}

std::string sha256_hex(const std::string& bytes) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  EVP_MD_CTX* ctx = EVP_MD_CTX_new();
  if (ctx == nullptr || EVP_DigestInit_ex(ctx, EVP_sha256(), nullptr) != 1 ||
      EVP_DigestUpdate(ctx, bytes.data(), bytes.size()) != 1 ||
      EVP_DigestFinal_ex(ctx, digest, &len) != 1) {
    EVP_MD_CTX_free(ctx);
    throw std::runtime_error("sha256 digest failed");
  }
  EVP_MD_CTX_free(ctx);
  static const char hex[] = "0123456789abcdef";
  std::string out;
  out.reserve(2 * len);
  for (unsigned int i = 0; i < len; ++i) {
    out += hex[digest[i] >> 4];
    out += hex[digest[i] & 0xf];
  }
  return out;
}

RunWriter::RunWriter(std::string dir) : dir_(std::move(dir)) {
  if (dir_.empty()) throw std::invalid_argument("output directory must not be empty");
  std::filesystem::create_directories(dir_);
}

void RunWriter::emit(const std::string& name, const std::string& content) {
  if (finalized_) throw std::logic_error("RunWriter: already finalized");
  if (name.find('/') != std::string::npos)
    throw std::invalid_argument("output file names must be flat: " + name);
  write_text_file(dir_ + "/" + name, content);
  for (const std::string& seen : files_)
    if (seen == name) return;  // overwrite in place, keep one manifest entry
  files_.push_back(name);
}

void RunWriter::csv(const std::string& name, const std::vector<std::string>& header,
                    const std::vector<std::vector<std::string>>& rows) {
  emit(name, csv_text(header, rows));
}

void RunWriter::text(const std::string& name, const std::string& content) {
  emit(name, content);
}

void RunWriter::json_file(const std::string& name, const nlohmann::json& j) {
  emit(name, j.dump(2) + "\n");
}

void RunWriter::jsonl(const std::string& name, const std::vector<nlohmann::json>& lines) {
  std::string content;
  for (const nlohmann::json& j : lines) {
    content += j.dump();
    content += '\n';
  }
  emit(name, content);
}

void RunWriter::finalize() {
  json_file("metadata.json", metadata_);
  nlohmann::json manifest;
  manifest["files"] = nlohmann::json::array();
  for (const std::string& name : files_) {
    std::ifstream in(dir_ + "/" + name, std::ios::binary);
    std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    manifest["files"].push_back(
        {{"name", name}, {"sha256", sha256_hex(bytes)}, {"bytes", bytes.size()}});
  }
  write_text_file(dir_ + "/manifest.json", manifest.dump(2) + "\n");
  finalized_ = true;
}

}  // namespace urbm::io
