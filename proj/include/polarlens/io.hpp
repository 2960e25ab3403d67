#pragma once

#include <fcntl.h>
#include <sys/file.h>
#include <sys/stat.h>
#include <unistd.h>
#include <zlib.h>

#include <charconv>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "polarlens/error.hpp"

namespace polarlens::io {

// Shortest decimal form that round-trips the value.
inline std::string format_double(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

// Line reader over zlib's gz layer, which also reads plain files
// transparently. zstd archives are not supported in this build.
class LineReader {
 public:
  explicit LineReader(const std::string& path) : path_(path) {
    if (path.size() > 4 && path.substr(path.size() - 4) == ".zst")
      throw IoError("zstd archives are not supported; use gzip or plain: " +
                    path);
    f_ = gzopen(path.c_str(), "rb");
    if (!f_) throw IoError("cannot open " + path);
  }
  ~LineReader() {
    if (f_) gzclose(f_);
  }
  LineReader(const LineReader&) = delete;
  LineReader& operator=(const LineReader&) = delete;

  // Returns false at EOF. Strips trailing \n / \r\n.
  bool next(std::string& line) {
    line.clear();
    char buf[1 << 16];
    bool got = false;
    while (true) {
      if (gzgets(f_, buf, sizeof(buf)) == nullptr) {
        int errnum = 0;
        const char* msg = gzerror(f_, &errnum);
        if (errnum != 0 && errnum != Z_STREAM_END)
          throw IoError(path_ + ": " + (msg ? msg : "read error"));
        return got;
      }
      got = true;
      line += buf;
      if (!line.empty() && line.back() == '\n') {
        line.pop_back();
        if (!line.empty() && line.back() == '\r') line.pop_back();
        return true;
      }
      // else: long line continues in the next chunk
    }
  }

 private:
  std::string path_;
  gzFile f_ = nullptr;
};

inline std::vector<std::string> read_lines(const std::string& path) {
  LineReader r(path);
  std::vector<std::string> lines;
  std::string line;
  while (r.next(line)) lines.push_back(line);
  return lines;
}

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Stage outputs are atomic: write to a temp file in the same directory, then
// rename over the target.
inline void atomic_write(const std::string& path, const std::string& content) {
  namespace fs = std::filesystem;
  fs::path target(path);
  if (target.has_parent_path()) fs::create_directories(target.parent_path());
  fs::path tmp = target;
  tmp += ".tmp." + std::to_string(::getpid());
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write " + tmp.string());
    out << content;
    out.flush();
    if (!out) throw IoError("short write to " + tmp.string());
  }
  std::error_code ec;
  fs::rename(tmp, target, ec);
  if (ec) {
    fs::remove(tmp, ec);
    throw IoError("cannot rename into place: " + path);
  }
}

inline void append_line(const std::string& path, const std::string& line) {
  std::ofstream out(path, std::ios::binary | std::ios::app);
  if (!out) throw IoError("cannot append to " + path);
  out << line << '\n';
  if (!out) throw IoError("short append to " + path);
}

// CSV with minimal quoting: fields containing comma, quote or newline are
// quoted, embedded quotes doubled.
inline std::string csv_escape(const std::string& field) {
  bool need = field.find_first_of(",\"\n\r") != std::string::npos;
  if (!need) return field;
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out += "\"\"";
    else out.push_back(c);
  }
  out += "\"";
  return out;
}

inline std::string csv_row(const std::vector<std::string>& fields) {
  std::string out;
  for (size_t i = 0; i < fields.size(); ++i) {
    if (i) out.push_back(',');
    out += csv_escape(fields[i]);
  }
  return out;
}

inline std::vector<std::string> csv_split(const std::string& line) {
  std::vector<std::string> fields;
  std::string cur;
  bool quoted = false;
  for (size_t i = 0; i < line.size(); ++i) {
    char c = line[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          cur.push_back('"');
          ++i;
        } else {
          quoted = false;
        }
      } else {
        cur.push_back(c);
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      fields.push_back(std::move(cur));
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  fields.push_back(std::move(cur));
  return fields;
}

// Advisory workspace lock: concurrent runs on one workspace fail fast.
class WorkspaceLock {
 public:
  explicit WorkspaceLock(const std::string& dir) {
    std::filesystem::create_directories(dir);
    path_ = dir + "/.lock";
    fd_ = ::open(path_.c_str(), O_CREAT | O_RDWR, 0644);
    if (fd_ < 0) throw IoError("cannot open lock file " + path_);
    if (::flock(fd_, LOCK_EX | LOCK_NB) != 0) {
      ::close(fd_);
      fd_ = -1;
      throw IoError("workspace is locked by another run: " + dir);
    }
  }
  ~WorkspaceLock() {
    if (fd_ >= 0) {
      ::flock(fd_, LOCK_UN);
      ::close(fd_);
    }
  }
  WorkspaceLock(const WorkspaceLock&) = delete;
  WorkspaceLock& operator=(const WorkspaceLock&) = delete;

 private:
  std::string path_;
  int fd_ = -1;
};

}  // namespace polarlens::io
