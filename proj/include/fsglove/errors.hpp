#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace fsglove {

/// Base class for every error the pipeline reports.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// so3
struct DegenerateMatrix : Error {
  using Error::Error;
};

// hand_model
struct IndexOutOfRange : Error {
  using Error::Error;
};
struct ParseError : Error {
  using Error::Error;
};
struct SchemaError : Error {
  using Error::Error;
};
struct VersionError : Error {
  using Error::Error;
};

// diffhcal
struct TooFewSamples : Error {
  using Error::Error;
};
struct ExcessiveSpread : Error {
  using Error::Error;
};
struct InsufficientPoses : Error {
  using Error::Error;
};
struct NoCaptures : Error {
  using Error::Error;
};
struct MissingSensor : Error {
  explicit MissingSensor(std::vector<int> ids)
      : Error(describe(ids)), sensor_ids(std::move(ids)) {}
  std::vector<int> sensor_ids;

 private:
  static std::string describe(const std::vector<int>& ids) {
    std::string msg = "missing sensor(s):";
    for (int id : ids) msg += " " + std::to_string(id);
    return msg;
  }
};
struct ModelHashMismatch : Error {
  using Error::Error;
};

// acquisition
struct BadMagic : Error {
  using Error::Error;
};
struct BadLength : Error {
  using Error::Error;
};
struct BadChecksum : Error {
  using Error::Error;
};
struct UnknownType : Error {
  using Error::Error;
};
struct NegativeDelay : Error {
  using Error::Error;
};
struct IoError : Error {
  using Error::Error;
};
struct CorruptFile : Error {
  CorruptFile(const std::string& msg, std::uint64_t offset)
      : Error(msg + " (last good offset " + std::to_string(offset) + ")"),
        last_good_offset(offset) {}
  std::uint64_t last_good_offset;
};
struct BindError : Error {
  using Error::Error;
};

// metrics
struct LengthMismatch : Error {
  using Error::Error;
};
struct ZeroRange : Error {
  using Error::Error;
};
struct EmptyInput : Error {
  using Error::Error;
};
struct EmptyMesh : Error {
  using Error::Error;
};

}  // namespace fsglove
