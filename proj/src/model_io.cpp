#include "sx/model_io.hpp"

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "sx/errors.hpp"

namespace sx {

namespace {

constexpr char kMagic[4] = {'S', 'S', 'M', '1'};

void put_u32(std::string& out, uint32_t v) {
    for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

void put_f64(std::string& out, double d) {
    const uint64_t v = std::bit_cast<uint64_t>(d);
    for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

class Reader {
public:
    Reader(const std::string& path, const std::string& data) : path_(path), data_(data) {}

    uint32_t u32() {
        need(4);
        uint32_t v = 0;
        for (int i = 0; i < 4; ++i)
            v |= static_cast<uint32_t>(static_cast<unsigned char>(data_[pos_ + i])) << (8 * i);
        pos_ += 4;
        return v;
    }
    double f64() {
        need(8);
        uint64_t v = 0;
        for (int i = 0; i < 8; ++i)
            v |= static_cast<uint64_t>(static_cast<unsigned char>(data_[pos_ + i])) << (8 * i);
        pos_ += 8;
        return std::bit_cast<double>(v);
    }
    void need(size_t n) {
        if (pos_ + n > data_.size())
            throw ParseError(path_, static_cast<long>(pos_), "truncated payload");
    }
    size_t remaining() const { return data_.size() - pos_; }

private:
    const std::string& path_;
    const std::string& data_;
    size_t pos_ = 0;
};

std::string slurp(const std::string& path) {
    std::ifstream file(path, std::ios::binary);
    if (!file) throw Error("cannot open '" + path + "'");
    std::ostringstream ss;
    ss << file.rdbuf();
    return std::move(ss).str();
}

void write_file(const std::string& path, const std::string& data) {
    std::ofstream file(path, std::ios::binary);
    if (!file) throw Error("cannot open '" + path + "' for writing");
    file.write(data.data(), static_cast<std::streamsize>(data.size()));
    if (!file) throw Error("write to '" + path + "' failed");
}

}  // namespace

void write_model(const std::string& path, const ShapeModel& model) {
    const uint32_t v = model.vertex_count();
    const uint32_t t = static_cast<uint32_t>(model.topology.size());
    const uint32_t n = static_cast<uint32_t>(model.num_modes());

    std::string out;
    out.append(kMagic, 4);
    put_u32(out, v);
    put_u32(out, t);
    put_u32(out, n);
    put_u32(out, model.sample_count);
    for (Eigen::Index i = 0; i < model.mean.size(); ++i) put_f64(out, model.mean(i));
    for (uint32_t m = 0; m < n; ++m)
        for (Eigen::Index i = 0; i < model.modes.rows(); ++i) put_f64(out, model.modes(i, m));
    for (uint32_t m = 0; m < n; ++m) put_f64(out, model.mode_stddevs(m));
    for (const Tri& tri : model.topology)
        for (uint32_t k : tri) put_u32(out, k);
    write_file(path, out);
}

ShapeModel read_model(const std::string& path) {
    const std::string data = slurp(path);
    if (data.size() < 4 || std::memcmp(data.data(), kMagic, 4) != 0)
        throw ParseError(path, 0, "magic mismatch (not an SSM1 model file)");
    Reader reader(path, data);
    reader.u32();  // magic, checked above

    ShapeModel model;
    const uint32_t v = reader.u32();
    const uint32_t t = reader.u32();
    const uint32_t n = reader.u32();
    model.sample_count = reader.u32();

    const size_t expect = static_cast<size_t>(8) * (3ull * v + 3ull * v * n + n) + 12ull * t;
    if (reader.remaining() != expect)
        throw ParseError(path, 20, "payload size mismatch (truncated or trailing bytes)");

    model.mean.resize(3 * static_cast<Eigen::Index>(v));
    for (Eigen::Index i = 0; i < model.mean.size(); ++i) model.mean(i) = reader.f64();
    model.modes.resize(3 * static_cast<Eigen::Index>(v), n);
    for (uint32_t m = 0; m < n; ++m)
        for (Eigen::Index i = 0; i < model.modes.rows(); ++i) model.modes(i, m) = reader.f64();
    model.mode_stddevs.resize(n);
    for (uint32_t m = 0; m < n; ++m) model.mode_stddevs(m) = reader.f64();
    model.topology.resize(t);
    for (Tri& tri : model.topology)
        for (uint32_t& k : tri) {
            k = reader.u32();
            if (k >= v)
                throw ParseError(path, static_cast<long>(data.size()),
                                 "triangle index " + std::to_string(k) + " out of range");
        }

    if (n > 0) {
        const Eigen::MatrixXd gram = model.modes.transpose() * model.modes;
        const double err =
            (gram - Eigen::MatrixXd::Identity(n, n)).cwiseAbs().maxCoeff();
        if (err > 1e-8)
            throw Error(path + ": stored modes fail the orthonormality check (deviation " +
                        std::to_string(err) + ")");
    }
    return model;
}

void write_partition(const std::string& path, const PartitionFileData& data) {
    for (size_t i = 0; i < data.unknown.size(); ++i) {
        if (data.unknown[i] >= data.vertex_count)
            throw Error("partition index out of range");
        if (i > 0 && data.unknown[i] <= data.unknown[i - 1])
            throw Error("partition indices must be sorted and unique");
    }
    nlohmann::ordered_json j;
    j["version"] = 1;
    j["vertex_count"] = data.vertex_count;
    j["unknown_indices"] = data.unknown;
    if (data.crop) {
        j["crop"] = {{"axis", axis_name(data.crop->axis)},
                     {"fraction", data.crop->fraction},
                     {"direction", data.crop->direction == CropDirection::from_min ? "min" : "max"}};
    }
    write_file(path, j.dump(2) + "\n");
}

PartitionFileData read_partition(const std::string& path) {
    const std::string text = slurp(path);
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& err) {
        throw ParseError(path, static_cast<long>(err.byte), err.what());
    }

    PartitionFileData data;
    try {
        if (j.at("version").get<int>() != 1)
            throw Error("unsupported partition version");
        data.vertex_count = j.at("vertex_count").get<uint32_t>();
        data.unknown = j.at("unknown_indices").get<std::vector<uint32_t>>();
        if (j.contains("crop")) {
            CropSpec spec;
            spec.axis = axis_from_name(j["crop"].at("axis").get<std::string>());
            spec.fraction = j["crop"].at("fraction").get<double>();
            const std::string dir = j["crop"].at("direction").get<std::string>();
            if (dir != "min" && dir != "max") throw Error("crop direction must be min or max");
            spec.direction = dir == "min" ? CropDirection::from_min : CropDirection::from_max;
            data.crop = spec;
        }
    } catch (const nlohmann::json::exception& err) {
        throw ParseError(path, 0, err.what());
    }

    for (size_t i = 0; i < data.unknown.size(); ++i) {
        if (data.unknown[i] >= data.vertex_count)
            throw ParseError(path, 0, "unknown index " + std::to_string(data.unknown[i]) +
                                          " out of range at position " + std::to_string(i));
        if (i > 0 && data.unknown[i] <= data.unknown[i - 1])
            throw ParseError(path, 0, "unknown_indices not sorted/unique at position " +
                                          std::to_string(i));
    }
    return data;
}

}  // namespace sx
