#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace semicp {

/// Base class for all errors raised by the registration pipeline.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct EmptyCloudError : Error {
    EmptyCloudError() : Error("point cloud is empty") {}
    explicit EmptyCloudError(const std::string& what) : Error(what) {}
};

struct LabelMismatchError : Error {
    int label;
    explicit LabelMismatchError(int l)
        : Error("source label " + std::to_string(l) + " has no counterpart in the target cloud"),
          label(l) {}
};

struct InsufficientLabelsError : Error {
    explicit InsufficientLabelsError(const std::string& what) : Error(what) {}
};

struct TooFewPointsError : Error {
    explicit TooFewPointsError(const std::string& what) : Error(what) {}
};

struct MissingLabelIndexError : Error {
    int label;
    explicit MissingLabelIndexError(int l)
        : Error("no index for label " + std::to_string(l) + " and global fallback is disabled"),
          label(l) {}
};

struct MissingNormalsError : Error {
    MissingNormalsError() : Error("target cloud has no normals") {}
};

struct NonFiniteGradientError : Error {
    NonFiniteGradientError() : Error("gradient contains a non-finite value") {}
};

struct OutOfGridError : Error {
    std::size_t point_index;
    explicit OutOfGridError(std::size_t idx)
        : Error("point " + std::to_string(idx) + " lies outside the [-1,1]^3 grid domain"),
          point_index(idx) {}
};

struct LengthMismatchError : Error {
    explicit LengthMismatchError(const std::string& what) : Error(what) {}
};

struct AllCellsFoldedError : Error {
    AllCellsFoldedError() : Error("every grid cell has a non-positive Jacobian determinant") {}
};

struct FoldedGroundTruthError : Error {
    FoldedGroundTruthError()
        : Error("could not generate a fold-free ground-truth deformation after 10 attempts") {}
};

struct PlyError : Error {
    explicit PlyError(const std::string& what) : Error(what) {}
};

struct GridFormatError : Error {
    explicit GridFormatError(const std::string& what) : Error(what) {}
};

struct ConfigError : Error {
    explicit ConfigError(const std::string& what) : Error(what) {}
};

}  // namespace semicp
