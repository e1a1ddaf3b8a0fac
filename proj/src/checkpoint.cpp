#include "tsgan/errors.hpp"
#include "tsgan/gan_model.hpp"

#include <bit>
#include <charconv>
#include <cstring>
#include <fstream>
#include <map>
#include <sstream>

namespace tsgan {

namespace {

constexpr char kMagic[6] = {'T', 'S', 'G', 'A', 'N', '\0'};

static_assert(std::endian::native == std::endian::little,
              "checkpoint I/O assumes a little-endian host");

struct BlockRef {
    std::string name;
    Matrix* matrix = nullptr;  // exactly one of matrix / row / vec / scalar is set
    Vector* vec = nullptr;
    RowVector* row = nullptr;
    double* scalar = nullptr;

    Eigen::Index rows() const {
        if (matrix) return matrix->rows();
        if (vec) return vec->size();
        return 1;
    }
    Eigen::Index cols() const {
        if (matrix) return matrix->cols();
        if (row) return row->size();
        return 1;
    }
    double& at(Eigen::Index r, Eigen::Index c) const {
        if (matrix) return (*matrix)(r, c);
        if (vec) return (*vec)[r];
        if (row) return (*row)[c];
        return *scalar;
    }
};

void collect(LstmStack& stack, SigmoidHead& head, const std::string& prefix,
             std::vector<BlockRef>& out) {
    for (std::size_t l = 0; l < stack.layers.size(); ++l) {
        auto& p = stack.layers[l];
        const std::string base = prefix + ".lstm" + std::to_string(l + 1);
        out.push_back({base + ".input_weights", &p.input_weights});
        out.push_back({base + ".recurrent_weights", &p.recurrent_weights});
        out.push_back({base + ".biases", nullptr, &p.biases});
    }
    out.push_back({prefix + ".head.weights", nullptr, nullptr, &head.weights});
    out.push_back({prefix + ".head.bias", nullptr, nullptr, nullptr, &head.bias});
}

std::vector<BlockRef> collect(GanModel& model) {
    std::vector<BlockRef> out;
    collect(model.generator.lstm, model.generator.head, "generator", out);
    collect(model.discriminator.lstm, model.discriminator.head, "discriminator", out);
    return out;
}

std::string format_double(double v) {
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

template <typename T>
T parse_number(const std::map<std::string, std::string>& kv, const std::string& key) {
    auto it = kv.find(key);
    if (it == kv.end()) throw CheckpointError("checkpoint header is missing '" + key + "'");
    T value{};
    const auto& s = it->second;
    auto res = std::from_chars(s.data(), s.data() + s.size(), value);
    if (res.ec != std::errc() || res.ptr != s.data() + s.size())
        throw CheckpointError("checkpoint header field '" + key + "' is not a number: " + s);
    return value;
}

template <typename T>
void write_raw(std::ostream& os, T value) {
    os.write(reinterpret_cast<const char*>(&value), sizeof value);
}

template <typename T>
T read_raw(std::istream& is, const char* what) {
    T value{};
    if (!is.read(reinterpret_cast<char*>(&value), sizeof value))
        throw CheckpointError(std::string("checkpoint truncated while reading ") + what);
    return value;
}

} // namespace

void save_checkpoint(const GanModel& model, const std::filesystem::path& path) {
    model.validate();
    GanModel copy = model;
    const auto blocks = collect(copy);

    std::ostringstream header;
    const auto& m = model.meta;
    header << "length=" << m.length << '\n'
           << "num_classes=" << m.num_classes << '\n'
           << "latent_dim=" << m.latent_dim << '\n'
           << "units=" << m.units << '\n'
           << "layers=" << m.layers << '\n'
           << "norm_min=" << format_double(m.norm_min) << '\n'
           << "norm_max=" << format_double(m.norm_max) << '\n'
           << "seed=" << m.seed << '\n'
           << "epoch=" << m.epoch << '\n';
    if (!m.label_names.empty()) {
        header << "label_names=";
        for (std::size_t k = 0; k < m.label_names.size(); ++k)
            header << (k ? "," : "") << m.label_names[k];
        header << '\n';
    }
    header << "blocks=" << blocks.size() << '\n';
    std::uint64_t offset = 0;
    for (const auto& b : blocks) {
        header << "block=" << b.name << ' ' << b.rows() << ' ' << b.cols() << ' ' << offset << '\n';
        offset += static_cast<std::uint64_t>(b.rows() * b.cols()) * sizeof(double);
    }
    const std::string text = header.str();

    auto tmp = path;
    tmp += ".tmp";
    {
        std::ofstream os(tmp, std::ios::binary | std::ios::trunc);
        if (!os) throw CheckpointError("cannot open '" + tmp.string() + "' for writing");
        os.write(kMagic, sizeof kMagic);
        write_raw<std::uint32_t>(os, kCheckpointVersion);
        write_raw<std::uint64_t>(os, text.size());
        os.write(text.data(), static_cast<std::streamsize>(text.size()));
        // Row-major payload.
        for (const auto& b : blocks)
            for (Eigen::Index r = 0; r < b.rows(); ++r)
                for (Eigen::Index c = 0; c < b.cols(); ++c) write_raw<double>(os, b.at(r, c));
        os.flush();
        if (!os) throw CheckpointError("write to '" + tmp.string() + "' failed");
    }
    std::filesystem::rename(tmp, path);
}

GanModel load_checkpoint(const std::filesystem::path& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw CheckpointError("cannot open checkpoint '" + path.string() + "'");

    char magic[sizeof kMagic];
    if (!is.read(magic, sizeof magic) || std::memcmp(magic, kMagic, sizeof kMagic) != 0)
        throw CheckpointError("'" + path.string() + "' is not a TSGAN checkpoint (bad magic)");
    const auto version = read_raw<std::uint32_t>(is, "version");
    if (version != kCheckpointVersion)
        throw CheckpointError("unsupported checkpoint version " + std::to_string(version) +
                              " (expected " + std::to_string(kCheckpointVersion) + ")");
    const auto header_size = read_raw<std::uint64_t>(is, "header length");
    if (header_size > (1u << 26)) throw CheckpointError("checkpoint header length is implausible");
    std::string text(header_size, '\0');
    if (!is.read(text.data(), static_cast<std::streamsize>(header_size)))
        throw CheckpointError("checkpoint truncated inside the header");

    std::map<std::string, std::string> kv;
    std::vector<std::string> block_lines;
    std::istringstream lines(text);
    for (std::string line; std::getline(lines, line);) {
        const auto eq = line.find('=');
        if (eq == std::string::npos) throw CheckpointError("malformed header line: " + line);
        const auto key = line.substr(0, eq);
        if (key == "block")
            block_lines.push_back(line.substr(eq + 1));
        else
            kv[key] = line.substr(eq + 1);
    }

    ModelMeta meta;
    meta.length = parse_number<int>(kv, "length");
    meta.num_classes = parse_number<int>(kv, "num_classes");
    meta.latent_dim = parse_number<int>(kv, "latent_dim");
    meta.units = parse_number<int>(kv, "units");
    meta.layers = parse_number<int>(kv, "layers");
    meta.norm_min = parse_number<double>(kv, "norm_min");
    meta.norm_max = parse_number<double>(kv, "norm_max");
    meta.seed = parse_number<std::uint64_t>(kv, "seed");
    meta.epoch = parse_number<int>(kv, "epoch");
    if (auto it = kv.find("label_names"); it != kv.end()) {
        std::istringstream names(it->second);
        for (std::string name; std::getline(names, name, ',');) meta.label_names.push_back(name);
        if (static_cast<int>(meta.label_names.size()) != meta.num_classes)
            throw CheckpointError("checkpoint lists " + std::to_string(meta.label_names.size()) +
                                  " label names for " + std::to_string(meta.num_classes) + " classes");
    }
    if (meta.length < 1 || meta.num_classes < 1 || meta.latent_dim < 1 || meta.units < 1 ||
        meta.layers < 1)
        throw CheckpointError("checkpoint metadata has non-positive dimensions");

    GanModel model;
    model.meta = meta;
    try {
        model.generator = GeneratorNet(meta.latent_dim, meta.num_classes, meta.units, meta.layers);
        model.discriminator = DiscriminatorNet(meta.num_classes, meta.units, meta.layers);
    } catch (const ShapeError& e) {
        throw CheckpointError(std::string("checkpoint shape inconsistency: ") + e.what());
    }
    const auto blocks = collect(model);
    if (parse_number<std::size_t>(kv, "blocks") != blocks.size() || block_lines.size() != blocks.size())
        throw CheckpointError("checkpoint block count does not match its architecture");

    std::uint64_t expected_offset = 0;
    for (std::size_t k = 0; k < blocks.size(); ++k) {
        std::istringstream fields(block_lines[k]);
        std::string name;
        Eigen::Index rows = 0, cols = 0;
        std::uint64_t offset = 0;
        if (!(fields >> name >> rows >> cols >> offset))
            throw CheckpointError("malformed block entry: " + block_lines[k]);
        const auto& b = blocks[k];
        if (name != b.name || rows != b.rows() || cols != b.cols() || offset != expected_offset)
            throw CheckpointError("checkpoint block '" + name + "' (" + std::to_string(rows) + "x" +
                                  std::to_string(cols) + ") does not match expected '" + b.name +
                                  "' (" + std::to_string(b.rows()) + "x" +
                                  std::to_string(b.cols()) + ")");
        expected_offset += static_cast<std::uint64_t>(rows * cols) * sizeof(double);
    }
    for (const auto& b : blocks)
        for (Eigen::Index r = 0; r < b.rows(); ++r)
            for (Eigen::Index c = 0; c < b.cols(); ++c) b.at(r, c) = read_raw<double>(is, b.name.c_str());
    if (is.peek() != std::char_traits<char>::eof())
        throw CheckpointError("checkpoint has trailing bytes after the last block");

    try {
        model.validate();
    } catch (const ShapeError& e) {
        throw CheckpointError(std::string("checkpoint failed validation: ") + e.what());
    }
    return model;
}

} // namespace tsgan
