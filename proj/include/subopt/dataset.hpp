#pragma once

#include <cerrno>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "subopt/common.hpp"

namespace subopt {

namespace detail {

/// Round-trip formatting so CSV outputs are byte-identical across reruns
/// and reload to the exact same doubles.
inline std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace detail

/// Immutable N x d feature matrix with an optional response. The finite
/// population every risk in this library averages over.
class Dataset {
 public:
  Dataset(Eigen::MatrixXd features, std::optional<Eigen::VectorXd> response)
      : features_(std::move(features)), response_(std::move(response)) {
    if (features_.rows() < 1 || features_.cols() < 1) {
      throw Error("Dataset: need at least one row and one column");
    }
    if (!features_.allFinite()) {
      throw Error("Dataset: non-finite feature entry");
    }
    if (response_) {
      if (response_->size() != features_.rows()) {
        throw Error("Dataset: response length does not match row count");
      }
      if (!response_->allFinite()) {
        throw Error("Dataset: non-finite response entry");
      }
    }
  }

  Index rows() const { return features_.rows(); }
  Index cols() const { return features_.cols(); }

  const Eigen::MatrixXd& features() const { return features_; }
  bool has_response() const { return response_.has_value(); }
  const Eigen::VectorXd& response() const {
    if (!response_) throw Error("Dataset: no response column");
    return *response_;
  }

  auto row(Index i) const { return features_.row(i); }

  /// Headerless CSV, one data point per row, response in the last column
  /// when present.
  static Dataset load_csv(const std::string& path, bool has_response = true) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path);
    std::vector<double> values;
    Index cols = -1;
    Index rows = 0;
    std::string line;
    while (std::getline(in, line)) {
      if (line.empty()) continue;
      Index line_cols = 0;
      const char* p = line.c_str();
      while (true) {
        char* end = nullptr;
        errno = 0;
        const double v = std::strtod(p, &end);
        if (end == p) throw IoError(path + ": malformed number in row " +
                                    std::to_string(rows));
        values.push_back(v);
        ++line_cols;
        p = end;
        while (*p == ' ' || *p == '\t') ++p;
        if (*p == ',') {
          ++p;
        } else if (*p == '\0' || *p == '\r') {
          break;
        } else {
          throw IoError(path + ": unexpected character in row " +
                        std::to_string(rows));
        }
      }
      if (cols < 0) {
        cols = line_cols;
      } else if (cols != line_cols) {
        throw IoError(path + ": ragged row " + std::to_string(rows));
      }
      ++rows;
    }
    if (rows == 0) throw IoError(path + ": empty file");
    if (has_response && cols < 2) {
      throw IoError(path + ": expected at least one feature and a response");
    }
    const Index d = has_response ? cols - 1 : cols;
    Eigen::MatrixXd x(rows, d);
    Eigen::VectorXd y(has_response ? rows : 0);
    for (Index i = 0; i < rows; ++i) {
      for (Index j = 0; j < d; ++j) x(i, j) = values[i * cols + j];
      if (has_response) y(i) = values[i * cols + d];
    }
    if (has_response) return Dataset(std::move(x), std::move(y));
    return Dataset(std::move(x), std::nullopt);
  }

  void save_csv(const std::string& path) const {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write " + path);
    for (Index i = 0; i < rows(); ++i) {
      for (Index j = 0; j < cols(); ++j) {
        if (j > 0) out << ',';
        out << detail::format_double(features_(i, j));
      }
      if (response_) out << ',' << detail::format_double((*response_)(i));
      out << '\n';
    }
    if (!out) throw IoError("write failed for " + path);
  }

 private:
  Eigen::MatrixXd features_;
  std::optional<Eigen::VectorXd> response_;
};

}  // namespace subopt
