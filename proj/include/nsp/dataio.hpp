#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace nsp {

/// Image dataset with pixels normalized to [0, 1].
struct Dataset {
    int rows = 0;
    int cols = 0;
    std::vector<float> images;       // n * rows * cols, row-major
    std::vector<std::uint8_t> labels; // class indices 0..9

    std::size_t size() const { return labels.size(); }
    const float* image(std::size_t i) const {
        return images.data() + i * static_cast<std::size_t>(rows) * cols;
    }
};

/// Load an IDX image/label file pair (big-endian magic 0x803 / 0x801).
/// Pixels are divided by 255; image and label counts are cross-checked.
/// Throws std::runtime_error with distinct messages for magic mismatch,
/// truncation (naming expected vs actual byte counts) and count mismatch.
Dataset load_idx(const std::string& images_path, const std::string& labels_path);

/// Re-serialize a dataset to the same IDX format (bit-exact payload).
void save_idx(const Dataset& data, const std::string& images_path,
              const std::string& labels_path);

/// One-hot targets with a constant offset added to every element
/// (correct class = 1 + offset, others = offset).
std::vector<float> encode_labels(const std::vector<std::uint8_t>& labels, double offset,
                                 int n_classes = 10);

/// Deterministic stratified subsample of n items; per-class counts are
/// proportional (largest remainder), selection order-preserving so n == N
/// returns the dataset unchanged. Throws std::invalid_argument when n > N.
Dataset subsample(const Dataset& data, std::size_t n, std::uint64_t seed);

}  // namespace nsp
