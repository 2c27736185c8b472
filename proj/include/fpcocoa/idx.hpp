#pragma once

// Reader for the big-endian IDX format used by the MNIST distribution.

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "fpcocoa/numkern.hpp"

namespace fpcocoa::idx {

inline constexpr std::uint32_t kImagesMagic = 0x00000803;  // 2051
inline constexpr std::uint32_t kLabelsMagic = 0x00000801;  // 2049

struct IdxArray {
  std::uint32_t magic = 0;
  std::vector<std::uint32_t> dims;
  std::vector<std::uint8_t> payload;
};

/// Parses an unsigned-byte IDX array; throws FormatError on an unknown magic
/// number or a payload shorter than the declared dimensions.
IdxArray parse(std::span<const std::uint8_t> bytes);

struct LabeledImages {
  Matrix images;            // one flattened image per row, pixels scaled to [0, 1]
  std::vector<int> labels;  // 0-9
};

/// Images from an image-magic array; labels from a label-magic array.
Matrix toImages(const IdxArray& images);
std::vector<int> toLabels(const IdxArray& labels);

/// Loads one IDX file; an image file yields images with an empty label list,
/// a label file yields labels with an empty image matrix.
LabeledImages loadIdx(const std::string& path);

/// Image file + matching label file.
LabeledImages loadLabeledImages(const std::string& imagesPath, const std::string& labelsPath);

}  // namespace fpcocoa::idx
