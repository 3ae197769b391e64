#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace specvote {

/// Base class for all library errors. Subclasses map onto the CLI
/// exit-code contract: any specvote::error is an input error (exit 1),
/// anything else escaping to the top level is internal (exit 2).
class error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// File could not be opened, read, or written.
class io_error : public error {
 public:
  using error::error;
};

/// Byte-level container damage: bad magic, bad version, truncated payload,
/// unparseable header.
class format_error : public error {
 public:
  using error::error;
};

/// Dimensions disagree with what the operation requires.
class shape_error : public error {
 public:
  using error::error;
};

/// Values violate a data invariant (NaN/Inf where finite is required).
class data_error : public error {
 public:
  using error::error;
};

/// A scalar argument is out of its documented range.
class parameter_error : public error {
 public:
  using error::error;
};

/// A feature vector with zero norm cannot be placed on the similarity
/// graph; carries the offending cell index.
class degenerate_feature_error : public error {
 public:
  degenerate_feature_error(std::size_t cell, const std::string& what)
      : error(what), cell_(cell) {}
  std::size_t cell() const noexcept { return cell_; }

 private:
  std::size_t cell_;
};

/// Recall is undefined: the ground-truth mask has no foreground.
class undefined_recall_error : public error {
 public:
  using error::error;
};

}  // namespace specvote
