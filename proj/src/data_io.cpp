#include "nrlb/dataset.hpp"

#include <cmath>
#include <cstring>
#include <fstream>
#include <numbers>
#include <sstream>

namespace nrlb {

void Dataset::validate() const {
    if (labels.size() != features.rows)
        throw std::invalid_argument("dataset: label count " + std::to_string(labels.size()) +
                                    " != feature rows " + std::to_string(features.rows));
    for (int l : labels)
        if (l < 0 || l >= num_classes)
            throw std::invalid_argument("dataset: label " + std::to_string(l) +
                                        " outside [0, " + std::to_string(num_classes) + ")");
}

void append(Dataset& ds, const Dataset& other) {
    if (ds.size() == 0) {
        ds = other;
        return;
    }
    require_shape(ds.features.cols == other.features.cols, "append feature dims");
    ds.features.data.insert(ds.features.data.end(), other.features.data.begin(),
                            other.features.data.end());
    ds.features.rows += other.features.rows;
    ds.labels.insert(ds.labels.end(), other.labels.begin(), other.labels.end());
    ds.num_classes = std::max(ds.num_classes, other.num_classes);
}

Dataset take(const Dataset& ds, const std::vector<std::size_t>& indices) {
    Dataset out;
    out.num_classes = ds.num_classes;
    out.features = Matrix(indices.size(), ds.features.cols);
    out.labels.reserve(indices.size());
    for (std::size_t i = 0; i < indices.size(); ++i) {
        auto src = ds.features.row(indices[i]);
        std::copy(src.begin(), src.end(), out.features.row(i).begin());
        out.labels.push_back(ds.labels[indices[i]]);
    }
    return out;
}

std::vector<std::size_t> class_counts(const Dataset& ds) {
    std::vector<std::size_t> counts(ds.num_classes, 0);
    for (int l : ds.labels) ++counts[static_cast<std::size_t>(l)];
    return counts;
}

// --- IDX --------------------------------------------------------------------

namespace {

struct ByteReader {
    std::vector<unsigned char> bytes;
    std::size_t pos = 0;
    std::string path;

    explicit ByteReader(const std::string& p) : path(p) {
        std::ifstream in(p, std::ios::binary);
        if (!in) throw std::runtime_error("cannot open file: " + p);
        bytes.assign(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
    }

    std::uint32_t read_u32_be() {
        if (pos + 4 > bytes.size())
            throw std::runtime_error(path + ": truncated at byte offset " + std::to_string(pos));
        std::uint32_t v = (std::uint32_t(bytes[pos]) << 24) | (std::uint32_t(bytes[pos + 1]) << 16) |
                          (std::uint32_t(bytes[pos + 2]) << 8) | std::uint32_t(bytes[pos + 3]);
        pos += 4;
        return v;
    }
};

}  // namespace

Matrix load_idx_images(const std::string& path) {
    ByteReader r(path);
    const std::uint32_t magic = r.read_u32_be();
    if (magic != 0x00000803u) {
        std::ostringstream os;
        os << path << ": bad IDX image magic 0x" << std::hex << magic << ", expected 0x00000803";
        throw std::runtime_error(os.str());
    }
    const std::uint32_t n = r.read_u32_be();
    const std::uint32_t rows = r.read_u32_be();
    const std::uint32_t cols = r.read_u32_be();
    if (n == 0 || rows == 0 || cols == 0)
        throw std::runtime_error(path + ": zero dimension in IDX header");
    const std::size_t payload = std::size_t(n) * rows * cols;
    if (r.bytes.size() != r.pos + payload)
        throw std::runtime_error(path + ": payload size " + std::to_string(r.bytes.size() - r.pos) +
                                 " != expected " + std::to_string(payload));
    Matrix m(n, std::size_t(rows) * cols);
    for (std::size_t i = 0; i < payload; ++i)
        m.data[i] = static_cast<double>(r.bytes[r.pos + i]) / 255.0;
    return m;
}

std::vector<int> load_idx_labels(const std::string& path) {
    ByteReader r(path);
    const std::uint32_t magic = r.read_u32_be();
    if (magic != 0x00000801u) {
        std::ostringstream os;
        os << path << ": bad IDX label magic 0x" << std::hex << magic << ", expected 0x00000801";
        throw std::runtime_error(os.str());
    }
    const std::uint32_t n = r.read_u32_be();
    if (r.bytes.size() != r.pos + n)
        throw std::runtime_error(path + ": payload size " + std::to_string(r.bytes.size() - r.pos) +
                                 " != expected " + std::to_string(n));
    std::vector<int> labels(n);
    for (std::uint32_t i = 0; i < n; ++i) labels[i] = r.bytes[r.pos + i];
    return labels;
}

Dataset load_idx_dataset(const std::string& images_path, const std::string& labels_path) {
    Dataset ds;
    ds.features = load_idx_images(images_path);
    ds.labels = load_idx_labels(labels_path);
    if (ds.labels.size() != ds.features.rows)
        throw std::runtime_error("IDX image count " + std::to_string(ds.features.rows) +
                                 " != label count " + std::to_string(ds.labels.size()));
    int maxl = 0;
    for (int l : ds.labels) maxl = std::max(maxl, l);
    ds.num_classes = maxl + 1;
    ds.validate();
    return ds;
}

// --- Toy generators ---------------------------------------------------------

Dataset make_blobs(std::size_t n_per_class, const std::vector<std::vector<double>>& centers,
                   double stddev, Rng& rng) {
    if (centers.empty()) throw std::invalid_argument("make_blobs: no centers");
    const std::size_t d = centers[0].size();
    for (const auto& c : centers)
        if (c.size() != d) throw std::invalid_argument("make_blobs: inconsistent center dims");

    Dataset ds;
    ds.num_classes = static_cast<int>(centers.size());
    ds.features = Matrix(n_per_class * centers.size(), d);
    ds.labels.reserve(ds.features.rows);
    std::normal_distribution<double> noise(0.0, 1.0);
    std::size_t row = 0;
    for (std::size_t k = 0; k < centers.size(); ++k) {
        for (std::size_t i = 0; i < n_per_class; ++i, ++row) {
            auto dst = ds.features.row(row);
            for (std::size_t j = 0; j < d; ++j) {
                double v = centers[k][j] + (stddev > 0.0 ? stddev * noise(rng) : 0.0);
                dst[j] = std::clamp(v, 0.0, 1.0);
            }
            ds.labels.push_back(static_cast<int>(k));
        }
    }
    return ds;
}

Dataset make_moons(std::size_t n, double noise, Rng& rng) {
    if (n == 0) throw std::invalid_argument("make_moons: n must be positive");
    const std::size_t n0 = (n + 1) / 2;  // upper arc gets the extra point when n is odd
    const std::size_t n1 = n - n0;

    // Conventional two-arc construction: upper arc is the unit half circle,
    // lower arc is its mirror shifted by (1, -0.5). Raw x in [-1, 2], y in [-1, 1].
    Dataset ds;
    ds.num_classes = 2;
    ds.features = Matrix(n, 2);
    ds.labels.reserve(n);
    std::normal_distribution<double> g(0.0, 1.0);
    const double pi = std::numbers::pi;
    std::size_t row = 0;
    for (std::size_t i = 0; i < n0; ++i, ++row) {
        const double t = n0 > 1 ? pi * double(i) / double(n0 - 1) : 0.0;
        double x = std::cos(t), y = std::sin(t);
        if (noise > 0.0) { x += noise * g(rng); y += noise * g(rng); }
        ds.features(row, 0) = (x + 1.0) / 3.0;
        ds.features(row, 1) = (y + 1.0) / 2.0;
        ds.labels.push_back(0);
    }
    for (std::size_t i = 0; i < n1; ++i, ++row) {
        const double t = n1 > 1 ? pi * double(i) / double(n1 - 1) : 0.0;
        double x = 1.0 - std::cos(t), y = -std::sin(t) + 0.5;
        if (noise > 0.0) { x += noise * g(rng); y += noise * g(rng); }
        ds.features(row, 0) = (x + 1.0) / 3.0;
        ds.features(row, 1) = (y + 1.0) / 2.0;
        ds.labels.push_back(1);
    }
    for (double& v : ds.features.data) v = std::clamp(v, 0.0, 1.0);
    return ds;
}

// --- Persistence ------------------------------------------------------------

namespace {
constexpr char kDsetMagic[4] = {'D', 'S', 'E', 'T'};
constexpr std::uint16_t kDsetVersion = 1;

template <typename T>
void write_raw(std::ofstream& out, const T& v) {
    out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T read_raw(std::ifstream& in, const std::string& path, const char* what) {
    T v{};
    in.read(reinterpret_cast<char*>(&v), sizeof(T));
    if (!in) throw std::runtime_error(path + ": truncated reading " + what);
    return v;
}
}  // namespace

void save_dataset(const Dataset& ds, const std::string& path) {
    ds.validate();
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path);
    out.write(kDsetMagic, 4);
    write_raw(out, kDsetVersion);
    write_raw(out, static_cast<std::uint64_t>(ds.features.rows));
    write_raw(out, static_cast<std::uint64_t>(ds.features.cols));
    write_raw(out, static_cast<std::uint32_t>(ds.num_classes));
    out.write(reinterpret_cast<const char*>(ds.features.data.data()),
              static_cast<std::streamsize>(ds.features.data.size() * sizeof(double)));
    for (int l : ds.labels) write_raw(out, static_cast<std::uint32_t>(l));
    if (!out) throw std::runtime_error("write failed: " + path);
}

Dataset load_dataset(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + path);
    char magic[4];
    in.read(magic, 4);
    if (!in || std::memcmp(magic, kDsetMagic, 4) != 0)
        throw std::runtime_error(path + ": bad dataset magic, expected \"DSET\"");
    const auto version = read_raw<std::uint16_t>(in, path, "version");
    if (version != kDsetVersion)
        throw std::runtime_error(path + ": dataset format version " + std::to_string(version) +
                                 " unsupported, this build reads version " +
                                 std::to_string(kDsetVersion));
    const auto rows = read_raw<std::uint64_t>(in, path, "row count");
    const auto cols = read_raw<std::uint64_t>(in, path, "column count");
    const auto k = read_raw<std::uint32_t>(in, path, "class count");
    Dataset ds;
    ds.num_classes = static_cast<int>(k);
    ds.features = Matrix(rows, cols);
    in.read(reinterpret_cast<char*>(ds.features.data.data()),
            static_cast<std::streamsize>(ds.features.data.size() * sizeof(double)));
    if (!in) throw std::runtime_error(path + ": truncated feature block");
    ds.labels.resize(rows);
    for (std::uint64_t i = 0; i < rows; ++i)
        ds.labels[i] = static_cast<int>(read_raw<std::uint32_t>(in, path, "label"));
    ds.validate();
    return ds;
}

// --- CSV --------------------------------------------------------------------

void CsvTable::add_row(std::vector<std::string> cells) {
    if (cells.size() != columns.size())
        throw std::invalid_argument("csv row has " + std::to_string(cells.size()) +
                                    " cells, table has " + std::to_string(columns.size()) +
                                    " columns");
    rows.push_back(std::move(cells));
}

std::string csv_number(double v) {
    std::ostringstream os;
    os.precision(17);
    os << v;
    return os.str();
}

namespace {
std::string csv_escape(const std::string& field) {
    if (field.find_first_of(",\"\n\r") == std::string::npos) return field;
    std::string out = "\"";
    for (char c : field) {
        if (c == '"') out += '"';
        out += c;
    }
    out += '"';
    return out;
}
}  // namespace

void write_metrics_csv(const CsvTable& table, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path);
    for (std::size_t j = 0; j < table.columns.size(); ++j) {
        if (j) out << ',';
        out << csv_escape(table.columns[j]);
    }
    out << '\n';
    for (const auto& row : table.rows) {
        for (std::size_t j = 0; j < row.size(); ++j) {
            if (j) out << ',';
            out << csv_escape(row[j]);
        }
        out << '\n';
    }
    if (!out) throw std::runtime_error("write failed: " + path);
}

}  // namespace nrlb
