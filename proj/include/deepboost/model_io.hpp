#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "deepboost/deepmodel.hpp"
#include "deepboost/error.hpp"

namespace deepboost {

// Model file layout (all integers and doubles little-endian):
//
//   "DPBOOST1"                      8-byte magic
//   u32 format version              currently 1
//   u32 section count
//   per section:
//     u32 tag                       'CONF' once, then 'CLAS' per class
//     u64 payload length
//     payload
//     u32 CRC-32 of the payload
//
// See docs/model_format.md for the payload fields.

class ModelFileError : public Error {
public:
    using Error::Error;
};
class BadMagicError : public ModelFileError {
public:
    using ModelFileError::ModelFileError;
};
class VersionMismatchError : public ModelFileError {
public:
    using ModelFileError::ModelFileError;
};
class TruncatedModelError : public ModelFileError {
public:
    using ModelFileError::ModelFileError;
};
class ChecksumError : public ModelFileError {
public:
    using ModelFileError::ModelFileError;
};

std::vector<unsigned char> serialize_model(const DeepBoostModel& model);
DeepBoostModel deserialize_model(const std::vector<unsigned char>& bytes);

void save_model(const DeepBoostModel& model, const std::filesystem::path& path);
DeepBoostModel load_model(const std::filesystem::path& path);

}  // namespace deepboost
