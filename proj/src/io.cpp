#include "unmix/io.hpp"

#include <json.hpp>

#include <algorithm>
#include <bit>
#include <cstdio>
#include <fstream>
#include <sstream>

static_assert(std::endian::native == std::endian::little,
              "file formats are little-endian; big-endian hosts unsupported");

namespace unmix {

using nlohmann::json;

namespace {

std::ofstream open_out(const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw InvalidInputError("cannot open for writing: " + path);
    return out;
}

std::ifstream open_in(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw InvalidInputError("cannot open for reading: " + path);
    return in;
}

void write_f64(std::ofstream& out, const double* data, std::size_t count) {
    out.write(reinterpret_cast<const char*>(data),
              static_cast<std::streamsize>(count * sizeof(double)));
}

void read_exact(std::ifstream& in, char* dst, std::size_t bytes, std::uint64_t offset,
                const char* what) {
    in.read(dst, static_cast<std::streamsize>(bytes));
    if (static_cast<std::size_t>(in.gcount()) != bytes)
        throw FormatError(std::string("truncated ") + what,
                          offset + static_cast<std::uint64_t>(std::max<std::streamsize>(in.gcount(), 0)));
}

json read_header_line(std::ifstream& in, std::uint64_t& offset) {
    std::string line;
    if (!std::getline(in, line)) throw FormatError("missing header line", 0);
    offset = line.size() + 1;
    json j = json::parse(line, nullptr, false);
    if (j.is_discarded()) throw FormatError("header is not valid JSON", 0);
    return j;
}

}  // namespace

// ============================================================================
// Bag files
// ============================================================================

void write_bag_file(const std::string& path, const PatchSet& bag,
                    const ModelParams* truth) {
    bag.validate(-1.0);
    if (truth) {
        if (truth->bands() != bag.bands() || truth->count() != bag.count())
            throw DimensionError("write_bag_file: truth shape mismatch");
    }
    json manifest;
    manifest["format_version"] = 1;
    manifest["M"] = bag.bands();
    manifest["K"] = bag.count();
    json sizes = json::array();
    for (const auto& p : bag.patches) sizes.push_back(p.pixels());
    manifest["patch_sizes"] = sizes;
    manifest["ground_truth_present"] = (truth != nullptr);

    auto out = open_out(path);
    out << manifest.dump() << '\n';
    for (const auto& p : bag.patches)
        write_f64(out, p.data.data(), static_cast<std::size_t>(p.data.size()));
    if (truth) {
        write_f64(out, truth->f.data(), static_cast<std::size_t>(truth->f.size()));
        for (const auto& v : truth->v)
            write_f64(out, v.data(), static_cast<std::size_t>(v.size()));
        for (const auto& c : truth->C) {
            // Row-major 2 x N_k: full row 1 then row 2.
            const Eigen::RowVectorXd r0 = c.row(0), r1 = c.row(1);
            write_f64(out, r0.data(), static_cast<std::size_t>(r0.size()));
            write_f64(out, r1.data(), static_cast<std::size_t>(r1.size()));
        }
    }
    if (!out) throw InvalidInputError("write failed: " + path);
}

BagFileContents read_bag_file(const std::string& path) {
    auto in = open_in(path);
    std::uint64_t offset = 0;
    json manifest = read_header_line(in, offset);
    if (!manifest.contains("M") || !manifest.contains("K") ||
        !manifest.contains("patch_sizes") || !manifest.contains("ground_truth_present"))
        throw FormatError("bag manifest missing required fields", 0);
    const int M = manifest["M"].get<int>();
    const int K = manifest["K"].get<int>();
    const auto sizes = manifest["patch_sizes"].get<std::vector<int>>();
    const bool has_truth = manifest["ground_truth_present"].get<bool>();
    if (static_cast<int>(sizes.size()) != K)
        throw FormatError("bag manifest patch_sizes length != K", 0);
    if (M < 1) throw FormatError("bag manifest M < 1", 0);

    BagFileContents out;
    out.bag.patches.resize(K);
    for (int k = 0; k < K; ++k) {
        out.bag.patches[k].data.resize(M, sizes[k]);
        const std::size_t bytes = sizeof(double) * M * sizes[k];
        read_exact(in, reinterpret_cast<char*>(out.bag.patches[k].data.data()), bytes,
                   offset, "bag patch payload");
        offset += bytes;
    }
    if (has_truth) {
        ModelParams t;
        t.f.resize(M);
        read_exact(in, reinterpret_cast<char*>(t.f.data()), sizeof(double) * M, offset,
                   "bag truth f");
        offset += sizeof(double) * M;
        t.v.resize(K);
        for (int k = 0; k < K; ++k) {
            t.v[k].resize(M);
            read_exact(in, reinterpret_cast<char*>(t.v[k].data()), sizeof(double) * M,
                       offset, "bag truth v");
            offset += sizeof(double) * M;
        }
        t.C.resize(K);
        for (int k = 0; k < K; ++k) {
            Eigen::RowVectorXd r0(sizes[k]), r1(sizes[k]);
            read_exact(in, reinterpret_cast<char*>(r0.data()), sizeof(double) * sizes[k],
                       offset, "bag truth C");
            offset += sizeof(double) * sizes[k];
            read_exact(in, reinterpret_cast<char*>(r1.data()), sizeof(double) * sizes[k],
                       offset, "bag truth C");
            offset += sizeof(double) * sizes[k];
            t.C[k].resize(2, sizes[k]);
            t.C[k].row(0) = r0;
            t.C[k].row(1) = r1;
        }
        out.truth = std::move(t);
    }
    // Trailing bytes mean the payload does not match the manifest.
    char probe;
    in.read(&probe, 1);
    if (in.gcount() == 1) throw FormatError("trailing bytes after bag payload", offset);
    return out;
}

// ============================================================================
// Cube files
// ============================================================================

void write_cube_file(const std::string& path, const LabeledCube& cube) {
    cube.validate();
    json header;
    header["format_version"] = 1;
    header["width"] = cube.width;
    header["height"] = cube.height;
    header["bands"] = cube.bands;
    header["label_names"] = cube.label_names;

    auto out = open_out(path);
    out << header.dump() << '\n';
    out.write(reinterpret_cast<const char*>(cube.image.data()),
              static_cast<std::streamsize>(cube.image.size() * sizeof(float)));
    out.write(reinterpret_cast<const char*>(cube.labels.data()),
              static_cast<std::streamsize>(cube.labels.size() * sizeof(std::uint16_t)));
    out.write(reinterpret_cast<const char*>(cube.foreground.data()),
              static_cast<std::streamsize>(cube.foreground.size()));
    if (!out) throw InvalidInputError("write failed: " + path);
}

LabeledCube read_cube_file(const std::string& path) {
    auto in = open_in(path);
    std::uint64_t offset = 0;
    json header = read_header_line(in, offset);
    if (!header.contains("width") || !header.contains("height") ||
        !header.contains("bands"))
        throw FormatError("cube header missing required fields", 0);
    LabeledCube cube;
    cube.width = header["width"].get<int>();
    cube.height = header["height"].get<int>();
    cube.bands = header["bands"].get<int>();
    if (header.contains("label_names"))
        cube.label_names = header["label_names"].get<std::vector<std::string>>();
    if (cube.width < 1 || cube.height < 1 || cube.bands < 1)
        throw FormatError("cube header has nonpositive dimensions", 0);

    const long px = cube.pixel_count();
    cube.image.resize(static_cast<std::size_t>(px) * cube.bands);
    read_exact(in, reinterpret_cast<char*>(cube.image.data()),
               cube.image.size() * sizeof(float), offset, "cube image payload");
    offset += cube.image.size() * sizeof(float);
    cube.labels.resize(static_cast<std::size_t>(px));
    read_exact(in, reinterpret_cast<char*>(cube.labels.data()),
               cube.labels.size() * sizeof(std::uint16_t), offset, "cube label payload");
    offset += cube.labels.size() * sizeof(std::uint16_t);
    cube.foreground.resize(static_cast<std::size_t>(px));
    read_exact(in, reinterpret_cast<char*>(cube.foreground.data()),
               cube.foreground.size(), offset, "cube foreground plane");
    offset += cube.foreground.size();
    char probe;
    in.read(&probe, 1);
    if (in.gcount() == 1) throw FormatError("trailing bytes after cube payload", offset);
    return cube;
}

// ============================================================================
// Tables
// ============================================================================

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

void write_records_csv(const std::string& path, const std::vector<EvalRecord>& records) {
    auto out = open_out(path);
    out << "algorithm,lambda_or_alpha,snr,bag_id,seed,angular_difference_deg\n";
    for (const auto& r : records)
        out << r.algorithm << ',' << format_double(r.lambda_or_alpha) << ','
            << format_double(r.snr) << ',' << r.bag_id << ',' << r.seed << ','
            << format_double(r.angular_difference_deg) << '\n';
}

std::vector<EvalRecord> read_records_csv(const std::string& path) {
    auto in = open_in(path);
    std::string line;
    if (!std::getline(in, line)) throw FormatError("empty records csv", 0);
    std::vector<EvalRecord> records;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::stringstream ss(line);
        std::string field;
        EvalRecord r;
        std::getline(ss, r.algorithm, ',');
        std::getline(ss, field, ',');
        r.lambda_or_alpha = std::stod(field);
        std::getline(ss, field, ',');
        r.snr = std::stod(field);
        std::getline(ss, field, ',');
        r.bag_id = std::stoi(field);
        std::getline(ss, field, ',');
        r.seed = std::stoull(field);
        std::getline(ss, field, ',');
        r.angular_difference_deg = std::stod(field);
        records.push_back(std::move(r));
    }
    return records;
}

void write_medians_csv(const std::string& path, const std::vector<MedianRow>& rows) {
    auto out = open_out(path);
    out << "algorithm,lambda_or_alpha,snr,median_angular_difference_deg,count\n";
    for (const auto& r : rows)
        out << r.algorithm << ',' << format_double(r.lambda_or_alpha) << ','
            << format_double(r.snr) << ',' << format_double(r.median_deg) << ','
            << r.count << '\n';
}

void write_curve_csv(const std::string& path, const std::vector<MedianRow>& curve) {
    auto out = open_out(path);
    out << "snr,median_angular_difference_deg\n";
    for (const auto& r : curve)
        out << format_double(r.snr) << ',' << format_double(r.median_deg) << '\n';
}

}  // namespace unmix
