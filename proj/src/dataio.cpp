#include "nsp/dataio.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <numeric>
#include <stdexcept>

#include "nsp/rng.hpp"

namespace nsp {

namespace {

std::uint32_t read_be32(std::istream& in, const std::string& path) {
    std::array<unsigned char, 4> b{};
    in.read(reinterpret_cast<char*>(b.data()), 4);
    if (!in) throw std::runtime_error("idx: truncated header in " + path);
    return (std::uint32_t(b[0]) << 24) | (std::uint32_t(b[1]) << 16) |
           (std::uint32_t(b[2]) << 8) | std::uint32_t(b[3]);
}

void write_be32(std::ostream& out, std::uint32_t v) {
    std::array<unsigned char, 4> b{static_cast<unsigned char>(v >> 24),
                                   static_cast<unsigned char>(v >> 16),
                                   static_cast<unsigned char>(v >> 8),
                                   static_cast<unsigned char>(v)};
    out.write(reinterpret_cast<const char*>(b.data()), 4);
}

std::vector<std::uint8_t> read_payload(std::ifstream& in, std::size_t expected,
                                       const std::string& path) {
    std::vector<std::uint8_t> payload(expected);
    in.read(reinterpret_cast<char*>(payload.data()), static_cast<std::streamsize>(expected));
    const auto got = static_cast<std::size_t>(in.gcount());
    if (got != expected)
        throw std::runtime_error("idx: truncated file " + path + ", expected " +
                                 std::to_string(expected) + " payload bytes, got " +
                                 std::to_string(got));
    return payload;
}

}  // namespace

Dataset load_idx(const std::string& images_path, const std::string& labels_path) {
    std::ifstream img(images_path, std::ios::binary);
    if (!img) throw std::runtime_error("idx: cannot open " + images_path);
    const std::uint32_t img_magic = read_be32(img, images_path);
    if (img_magic != 0x00000803u)
        throw std::runtime_error("idx: magic mismatch in " + images_path + ", expected 0x803");
    const std::uint32_t n_images = read_be32(img, images_path);
    const std::uint32_t rows = read_be32(img, images_path);
    const std::uint32_t cols = read_be32(img, images_path);
    const auto pixels =
        read_payload(img, std::size_t(n_images) * rows * cols, images_path);

    std::ifstream lab(labels_path, std::ios::binary);
    if (!lab) throw std::runtime_error("idx: cannot open " + labels_path);
    const std::uint32_t lab_magic = read_be32(lab, labels_path);
    if (lab_magic != 0x00000801u)
        throw std::runtime_error("idx: magic mismatch in " + labels_path + ", expected 0x801");
    const std::uint32_t n_labels = read_be32(lab, labels_path);
    if (n_labels != n_images)
        throw std::runtime_error("idx: count mismatch, " + std::to_string(n_images) +
                                 " images vs " + std::to_string(n_labels) + " labels");

    Dataset data;
    data.rows = static_cast<int>(rows);
    data.cols = static_cast<int>(cols);
    data.labels = read_payload(lab, n_labels, labels_path);
    data.images.resize(pixels.size());
    for (std::size_t i = 0; i < pixels.size(); ++i)
        data.images[i] = static_cast<float>(pixels[i]) / 255.0f;
    return data;
}

void save_idx(const Dataset& data, const std::string& images_path,
              const std::string& labels_path) {
    std::ofstream img(images_path, std::ios::binary);
    if (!img) throw std::runtime_error("idx: cannot open " + images_path);
    write_be32(img, 0x00000803u);
    write_be32(img, static_cast<std::uint32_t>(data.size()));
    write_be32(img, static_cast<std::uint32_t>(data.rows));
    write_be32(img, static_cast<std::uint32_t>(data.cols));
    for (float v : data.images) {
        const auto byte = static_cast<unsigned char>(std::lround(v * 255.0f));
        img.write(reinterpret_cast<const char*>(&byte), 1);
    }

    std::ofstream lab(labels_path, std::ios::binary);
    if (!lab) throw std::runtime_error("idx: cannot open " + labels_path);
    write_be32(lab, 0x00000801u);
    write_be32(lab, static_cast<std::uint32_t>(data.size()));
    lab.write(reinterpret_cast<const char*>(data.labels.data()),
              static_cast<std::streamsize>(data.labels.size()));
}

std::vector<float> encode_labels(const std::vector<std::uint8_t>& labels, double offset,
                                 int n_classes) {
    if (offset < 0.0) throw std::invalid_argument("encode_labels: offset must be nonnegative");
    std::vector<float> targets(labels.size() * n_classes, static_cast<float>(offset));
    for (std::size_t i = 0; i < labels.size(); ++i) {
        if (labels[i] >= n_classes) throw std::invalid_argument("encode_labels: label out of range");
        targets[i * n_classes + labels[i]] = static_cast<float>(1.0 + offset);
    }
    return targets;
}

Dataset subsample(const Dataset& data, std::size_t n, std::uint64_t seed) {
    if (n > data.size()) throw std::invalid_argument("subsample: n exceeds dataset size");
    const std::size_t total = data.size();

    std::vector<std::vector<std::size_t>> by_class(10);
    for (std::size_t i = 0; i < total; ++i) by_class[data.labels[i]].push_back(i);

    // proportional allocation by largest remainder
    std::vector<std::size_t> take(10, 0);
    std::vector<std::pair<double, int>> remainders;
    std::size_t assigned = 0;
    for (int c = 0; c < 10; ++c) {
        const double exact = static_cast<double>(n) * by_class[c].size() / total;
        take[c] = static_cast<std::size_t>(exact);
        assigned += take[c];
        remainders.push_back({exact - static_cast<double>(take[c]), c});
    }
    std::stable_sort(remainders.begin(), remainders.end(),
                     [](const auto& a, const auto& b) { return a.first > b.first; });
    for (std::size_t i = 0; assigned < n; ++i, ++assigned) ++take[remainders[i % 10].second];

    std::vector<std::size_t> chosen;
    chosen.reserve(n);
    for (int c = 0; c < 10; ++c) {
        auto pool = by_class[c];
        Rng rng(derive_seed(seed, static_cast<std::uint64_t>(c)));
        std::shuffle(pool.begin(), pool.end(), rng);
        take[c] = std::min(take[c], pool.size());
        chosen.insert(chosen.end(), pool.begin(), pool.begin() + take[c]);
    }
    std::sort(chosen.begin(), chosen.end());

    Dataset out;
    out.rows = data.rows;
    out.cols = data.cols;
    const std::size_t px = static_cast<std::size_t>(data.rows) * data.cols;
    out.images.reserve(chosen.size() * px);
    out.labels.reserve(chosen.size());
    for (std::size_t idx : chosen) {
        out.images.insert(out.images.end(), data.images.begin() + idx * px,
                          data.images.begin() + (idx + 1) * px);
        out.labels.push_back(data.labels[idx]);
    }
    return out;
}

}  // namespace nsp
