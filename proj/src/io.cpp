// mrctreg - MR-CT slice stack alignment and registration toolkit
// SPDX-License-Identifier: Apache-2.0

#include "mrct/io.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace mrct {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct PgmData {
    int width = 0, height = 0, maxval = 255;
    std::vector<int> raw;
};

int next_pgm_token(std::istream& in) {
    // Skips whitespace and '#' comments.
    while (true) {
        int c = in.peek();
        if (c == '#') {
            std::string line;
            std::getline(in, line);
        } else if (std::isspace(c)) {
            in.get();
        } else {
            break;
        }
    }
    int value = 0;
    if (!(in >> value)) return -1;
    return value;
}

PgmData read_pgm(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::io, "cannot open image file: " + path.string());

    std::string magic(2, '\0');
    in.read(magic.data(), 2);
    if (magic != "P5" && magic != "P2")
        throw Error(ErrorCode::format, "not a PGM (P2/P5) file: " + path.string());

    PgmData pgm;
    pgm.width = next_pgm_token(in);
    pgm.height = next_pgm_token(in);
    pgm.maxval = next_pgm_token(in);
    if (pgm.width < 1 || pgm.height < 1 || pgm.maxval < 1 || pgm.maxval > 65535)
        throw Error(ErrorCode::format, "malformed PGM header: " + path.string());

    const size_t n = static_cast<size_t>(pgm.width) * pgm.height;
    pgm.raw.resize(n);
    if (magic == "P2") {
        for (size_t i = 0; i < n; ++i) {
            const int v = next_pgm_token(in);
            if (v < 0) throw Error(ErrorCode::format, "truncated PGM data: " + path.string());
            pgm.raw[i] = v;
        }
    } else {
        in.get();  // single whitespace after maxval
        const int bytes = pgm.maxval > 255 ? 2 : 1;
        std::vector<unsigned char> buf(n * bytes);
        in.read(reinterpret_cast<char*>(buf.data()), static_cast<std::streamsize>(buf.size()));
        if (static_cast<size_t>(in.gcount()) != buf.size())
            throw Error(ErrorCode::format, "truncated PGM data: " + path.string());
        for (size_t i = 0; i < n; ++i)
            pgm.raw[i] = bytes == 2 ? (buf[2 * i] << 8) | buf[2 * i + 1] : buf[i];
    }
    return pgm;
}

}  // namespace

Slice load_pgm(const fs::path& path) {
    const PgmData pgm = read_pgm(path);
    Slice s(pgm.width, pgm.height);
    for (size_t i = 0; i < pgm.raw.size(); ++i)
        s.values[i] = std::min(pgm.raw[i], pgm.maxval) / static_cast<double>(pgm.maxval);
    return s;
}

void save_pgm(const Slice& slice, const fs::path& path, int bits) {
    if (bits != 8 && bits != 16)
        throw Error(ErrorCode::invalid_argument, "save_pgm: bits must be 8 or 16");
    const int maxval = bits == 8 ? 255 : 65535;
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(ErrorCode::io, "cannot write image file: " + path.string());
    out << "P5\n" << slice.width << " " << slice.height << "\n" << maxval << "\n";
    for (double v : slice.values) {
        const int q = static_cast<int>(std::lround(std::clamp(v, 0.0, 1.0) * maxval));
        if (bits == 16) out.put(static_cast<char>(q >> 8));
        out.put(static_cast<char>(q & 0xff));
    }
    if (!out) throw Error(ErrorCode::io, "failed writing image file: " + path.string());
}

LabelMask load_label_pgm(const fs::path& path) {
    const PgmData pgm = read_pgm(path);
    LabelMask m(pgm.width, pgm.height);
    for (size_t i = 0; i < pgm.raw.size(); ++i)
        m.values[i] = pgm.raw[i] / static_cast<double>(pgm.maxval) >= 0.5 ? 1 : 0;
    return m;
}

void save_label_pgm(const LabelMask& mask, const fs::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(ErrorCode::io, "cannot write label file: " + path.string());
    out << "P5\n" << mask.width << " " << mask.height << "\n255\n";
    for (uint8_t v : mask.values) out.put(v ? static_cast<char>(255) : 0);
    if (!out) throw Error(ErrorCode::io, "failed writing label file: " + path.string());
}

ImageStack load_stack(const fs::path& manifest_path) {
    std::ifstream in(manifest_path);
    if (!in) throw Error(ErrorCode::io, "cannot open manifest: " + manifest_path.string());

    json doc;
    try {
        in >> doc;
    } catch (const json::exception& e) {
        throw Error(ErrorCode::format,
                    "malformed manifest " + manifest_path.string() + ": " + e.what());
    }

    ImageStack stack;
    try {
        stack.modality = modality_from_name(doc.at("modality").get<std::string>());
        stack.layer_gap_mm = doc.at("layer_gap_mm").get<double>();
        const auto& slices = doc.at("slices");
        const auto& labels = doc.at("labels");
        if (!slices.is_array() || !labels.is_array())
            throw Error(ErrorCode::format, "malformed manifest " + manifest_path.string() +
                                               ": slices/labels must be arrays");
        if (slices.size() != labels.size())
            throw Error(ErrorCode::format, "malformed manifest " + manifest_path.string() +
                                               ": labels list length must equal slices list");

        const fs::path base = manifest_path.parent_path();
        for (size_t i = 0; i < slices.size(); ++i) {
            stack.slices.push_back(load_pgm(base / slices[i].get<std::string>()));
            if (labels[i].is_null())
                stack.labels.emplace_back(std::nullopt);
            else
                stack.labels.emplace_back(load_label_pgm(base / labels[i].get<std::string>()));
        }
    } catch (const json::exception& e) {
        throw Error(ErrorCode::format,
                    "malformed manifest " + manifest_path.string() + ": " + e.what());
    }

    validate(stack);
    return stack;
}

void save_stack(const ImageStack& stack, const fs::path& dir, const std::string& manifest_name) {
    validate(stack);
    std::error_code ec;
    fs::create_directories(dir / "slices", ec);
    fs::create_directories(dir / "labels", ec);

    json doc;
    doc["modality"] = modality_name(stack.modality);
    doc["layer_gap_mm"] = stack.layer_gap_mm;
    doc["slices"] = json::array();
    doc["labels"] = json::array();

    char name[64];
    for (int i = 0; i < stack.depth(); ++i) {
        std::snprintf(name, sizeof(name), "slices/%04d.pgm", i);
        save_pgm(stack.slices[i], dir / name);
        doc["slices"].push_back(name);
        if (stack.labels[i]) {
            std::snprintf(name, sizeof(name), "labels/%04d.pgm", i);
            save_label_pgm(*stack.labels[i], dir / name);
            doc["labels"].push_back(name);
        } else {
            doc["labels"].push_back(nullptr);
        }
    }

    std::ofstream out(dir / manifest_name);
    if (!out) throw Error(ErrorCode::io, "cannot write manifest: " + (dir / manifest_name).string());
    out << doc.dump(2) << "\n";
}

namespace {

constexpr char kFieldMagic[8] = {'M', 'R', 'C', 'T', 'F', 'L', 'D', '1'};

void put_u32(std::ostream& out, uint32_t v) {
    for (int i = 0; i < 4; ++i) out.put(static_cast<char>((v >> (8 * i)) & 0xff));
}

uint32_t get_u32(std::istream& in) {
    uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<uint32_t>(in.get() & 0xff) << (8 * i);
    return v;
}

void put_f32(std::ostream& out, float f) {
    uint32_t bits;
    static_assert(sizeof(bits) == sizeof(f));
    std::memcpy(&bits, &f, sizeof(bits));
    put_u32(out, bits);
}

float get_f32(std::istream& in) {
    const uint32_t bits = get_u32(in);
    float f;
    std::memcpy(&f, &bits, sizeof(f));
    return f;
}

}  // namespace

void save_field(const DisplacementField& field, const fs::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(ErrorCode::io, "cannot write field file: " + path.string());
    out.write(kFieldMagic, sizeof(kFieldMagic));
    put_u32(out, static_cast<uint32_t>(field.width));
    put_u32(out, static_cast<uint32_t>(field.height));
    for (size_t i = 0; i < field.pixel_count(); ++i) {
        put_f32(out, static_cast<float>(field.ux[i]));
        put_f32(out, static_cast<float>(field.uy[i]));
    }
    if (!out) throw Error(ErrorCode::io, "failed writing field file: " + path.string());
}

DisplacementField load_field(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::io, "cannot open field file: " + path.string());
    char magic[8];
    in.read(magic, sizeof(magic));
    if (in.gcount() != sizeof(magic) || std::memcmp(magic, kFieldMagic, sizeof(magic)) != 0)
        throw Error(ErrorCode::format, "not a displacement field file: " + path.string());
    const uint32_t w = get_u32(in);
    const uint32_t h = get_u32(in);
    if (w < 1 || h < 1 || w > 1u << 20 || h > 1u << 20)
        throw Error(ErrorCode::format, "malformed field header: " + path.string());
    DisplacementField field(static_cast<int>(w), static_cast<int>(h));
    for (size_t i = 0; i < field.pixel_count(); ++i) {
        field.ux[i] = get_f32(in);
        field.uy[i] = get_f32(in);
    }
    if (!in) throw Error(ErrorCode::format, "truncated field file: " + path.string());
    return field;
}

std::string format_double(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.10g", v);
    return buf;
}

void save_correspondence_csv(const CorrespondenceSet& set, const fs::path& path) {
    std::ofstream out(path);
    if (!out) throw Error(ErrorCode::io, "cannot write correspondence file: " + path.string());
    out << "# anchor_mr=" << set.anchor.mr_index << " anchor_ct=" << set.anchor.ct_index
        << " anchor_score=" << format_double(set.anchor.score)
        << " gap_mr_mm=" << format_double(set.gap_mr_mm)
        << " gap_ct_mm=" << format_double(set.gap_ct_mm) << "\n";
    out << "mr_index,ct_index_frac,score\n";
    for (const CorrespondencePair& p : set.pairs)
        out << p.mr_index << "," << format_double(p.ct_index_frac) << ","
            << format_double(p.score) << "\n";
    if (!out) throw Error(ErrorCode::io, "failed writing correspondence file: " + path.string());
}

CorrespondenceSet load_correspondence_csv(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::io, "cannot open correspondence file: " + path.string());
    CorrespondenceSet set;
    std::string line;
    bool have_header = false;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        if (line[0] == '#') {
            std::istringstream ls(line.substr(1));
            std::string kv;
            while (ls >> kv) {
                const auto eq = kv.find('=');
                if (eq == std::string::npos) continue;
                const std::string key = kv.substr(0, eq);
                const double val = std::stod(kv.substr(eq + 1));
                if (key == "anchor_mr") set.anchor.mr_index = static_cast<int>(val);
                else if (key == "anchor_ct") set.anchor.ct_index = static_cast<int>(val);
                else if (key == "anchor_score") set.anchor.score = val;
                else if (key == "gap_mr_mm") set.gap_mr_mm = val;
                else if (key == "gap_ct_mm") set.gap_ct_mm = val;
            }
            continue;
        }
        if (!have_header) {  // column header row
            have_header = true;
            continue;
        }
        CorrespondencePair p;
        if (std::sscanf(line.c_str(), "%d,%lf,%lf", &p.mr_index, &p.ct_index_frac, &p.score) != 3)
            throw Error(ErrorCode::format, "malformed correspondence row: " + line);
        set.pairs.push_back(p);
    }
    if (set.pairs.empty())
        throw Error(ErrorCode::format, "correspondence file has no pairs: " + path.string());
    return set;
}

}  // namespace mrct
