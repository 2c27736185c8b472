#include "fpcocoa/idx.hpp"

#include "fpcocoa/csv.hpp"
#include "fpcocoa/errors.hpp"

namespace fpcocoa::idx {

namespace {

std::uint32_t readBigEndian(std::span<const std::uint8_t> bytes, std::size_t at) {
  return (std::uint32_t{bytes[at]} << 24) | (std::uint32_t{bytes[at + 1]} << 16) |
         (std::uint32_t{bytes[at + 2]} << 8) | std::uint32_t{bytes[at + 3]};
}

}  // namespace

IdxArray parse(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < 4) throw FormatError("idx: truncated header");
  IdxArray out;
  out.magic = readBigEndian(bytes, 0);
  std::size_t rank = 0;
  if (out.magic == kImagesMagic) {
    rank = 3;
  } else if (out.magic == kLabelsMagic) {
    rank = 1;
  } else {
    throw FormatError("idx: unsupported magic number " + std::to_string(out.magic));
  }
  if (bytes.size() < 4 + 4 * rank) throw FormatError("idx: truncated header");
  std::size_t count = 1;
  for (std::size_t d = 0; d < rank; ++d) {
    out.dims.push_back(readBigEndian(bytes, 4 + 4 * d));
    count *= out.dims.back();
  }
  const std::size_t start = 4 + 4 * rank;
  if (bytes.size() - start < count) throw FormatError("idx: truncated payload");
  out.payload.assign(bytes.begin() + static_cast<std::ptrdiff_t>(start),
                     bytes.begin() + static_cast<std::ptrdiff_t>(start + count));
  return out;
}

Matrix toImages(const IdxArray& images) {
  if (images.magic != kImagesMagic) throw FormatError("idx: not an image array");
  const auto count = static_cast<Eigen::Index>(images.dims[0]);
  const auto pixels = static_cast<Eigen::Index>(images.dims[1]) * images.dims[2];
  Matrix m(count, pixels);
  for (Eigen::Index i = 0; i < count; ++i) {
    for (Eigen::Index j = 0; j < pixels; ++j) {
      m(i, j) = images.payload[static_cast<std::size_t>(i * pixels + j)] / 255.0;
    }
  }
  return m;
}

std::vector<int> toLabels(const IdxArray& labels) {
  if (labels.magic != kLabelsMagic) throw FormatError("idx: not a label array");
  std::vector<int> out(labels.payload.begin(), labels.payload.end());
  for (int v : out) {
    if (v > 9) throw FormatError("idx: label out of range 0-9");
  }
  return out;
}

LabeledImages loadIdx(const std::string& path) {
  const std::string raw = csv::readFile(path);
  const auto* data = reinterpret_cast<const std::uint8_t*>(raw.data());
  IdxArray arr;
  try {
    arr = parse({data, raw.size()});
  } catch (const FormatError& e) {
    throw FormatError(path + ": " + e.what());
  }
  LabeledImages out;
  if (arr.magic == kImagesMagic) {
    out.images = toImages(arr);
  } else {
    out.labels = toLabels(arr);
  }
  return out;
}

LabeledImages loadLabeledImages(const std::string& imagesPath, const std::string& labelsPath) {
  LabeledImages out;
  out.images = loadIdx(imagesPath).images;
  out.labels = loadIdx(labelsPath).labels;
  if (out.images.rows() != static_cast<Eigen::Index>(out.labels.size())) {
    throw FormatError("idx: image and label counts differ");
  }
  return out;
}

}  // namespace fpcocoa::idx
