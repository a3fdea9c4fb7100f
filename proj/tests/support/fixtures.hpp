#pragma once

#include <unistd.h>

#include <atomic>
#include <filesystem>
#include <fstream>
#include <string>
#include <utility>
#include <vector>

#include "contagion/portfolio.hpp"

namespace fixture {

// Scratch directory removed on destruction.
class TempDir {
 public:
  TempDir() {
    static std::atomic<int> counter{0};
    path_ = std::filesystem::temp_directory_path() /
            ("contagion_test_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

  void write(const std::string& name, const std::string& content) const {
    std::ofstream(path_ / name, std::ios::binary) << content;
  }

 private:
  std::filesystem::path path_;
};

inline contagion::InstitutionRecord bank(const std::string& id, double own_funds, double min_capital) {
  return {id, contagion::Amount::from_double(own_funds), contagion::Amount::from_double(min_capital)};
}

struct Entry {
  std::size_t reporter;
  std::size_t counterparty;
  double amount;
};

inline contagion::LayerExposures table(contagion::Layer layer, contagion::Basis basis,
                                       const std::vector<Entry>& entries) {
  contagion::LayerExposures t{layer, basis, {}};
  for (const auto& e : entries) {
    t.entries.emplace(std::pair{e.reporter, e.counterparty}, contagion::Amount::from_double(e.amount));
  }
  return t;
}

}  // namespace fixture
