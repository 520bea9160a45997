#pragma once

#include <cstdint>
#include <fstream>
#include <string>
#include <vector>

namespace ocfk {

// Writes to <path>.tmp.<pid> and renames into place on commit(). If the
// writer is destroyed without commit, the temp file is removed, so failed
// runs never leave partial outputs behind.
class AtomicFileWriter {
 public:
  AtomicFileWriter(const std::string& path, bool binary);
  ~AtomicFileWriter();

  AtomicFileWriter(const AtomicFileWriter&) = delete;
  AtomicFileWriter& operator=(const AtomicFileWriter&) = delete;

  std::ostream& stream() { return out_; }
  void commit();

 private:
  std::string path_;
  std::string temp_path_;
  std::ofstream out_;
  bool committed_ = false;
};

// Shortest decimal string that parses back to exactly the same double.
std::string format_double(double v);

void write_u32(std::ostream& os, std::uint32_t v);
void write_u64(std::ostream& os, std::uint64_t v);
void write_f64(std::ostream& os, double v);
void write_f64_array(std::ostream& os, const double* data, std::size_t n);

std::uint32_t read_u32(std::istream& is);
std::uint64_t read_u64(std::istream& is);
double read_f64(std::istream& is);
void read_f64_array(std::istream& is, double* data, std::size_t n);

std::string read_text_file(const std::string& path);

}  // namespace ocfk
