#include "dropletlink/device_io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace dropletlink::io {

namespace {

constexpr double kUniformityTolerance = 0.01;  // 1% spread in sample spacing

std::string format_g9(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.9g", v);
    return buf;
}

std::vector<std::string> split(const std::string& line, char sep) {
    std::vector<std::string> fields;
    std::size_t start = 0;
    while (true) {
        const std::size_t pos = line.find(sep, start);
        if (pos == std::string::npos) {
            fields.push_back(line.substr(start));
            break;
        }
        fields.push_back(line.substr(start, pos - start));
        start = pos + 1;
    }
    return fields;
}

double parse_number(const std::string& field, std::size_t line_no) {
    std::size_t consumed = 0;
    double value;
    try {
        value = std::stod(field, &consumed);
    } catch (const std::exception&) {
        throw FormatError("line " + std::to_string(line_no) + ": '" + field +
                          "' is not a number");
    }
    while (consumed < field.size() && std::isspace(static_cast<unsigned char>(field[consumed])))
        ++consumed;
    if (consumed != field.size())
        throw FormatError("line " + std::to_string(line_no) + ": trailing characters in '" +
                          field + "'");
    return value;
}

/// Shared row reader: header check, per-line field count, monotone and
/// uniform time column. Returns times and per-row field values (without the
/// time column).
struct Table {
    std::vector<double> times;
    std::vector<std::vector<double>> rows;
};

Table read_table(const std::string& text, const std::string& expected_header,
                 std::size_t expected_fields, bool spectral_layout) {
    std::istringstream in(text);
    std::string line;
    std::size_t line_no = 0;

    if (!std::getline(in, line)) throw FormatError("line 1: empty file");
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line != expected_header) {
        // A spectral file with the wrong number of columns is a channel-count
        // problem, not a generic format problem.
        if (spectral_layout && !line.empty() &&
            split(line, ',').size() != expected_fields)
            throw ChannelCountMismatchError("line 1: expected " +
                                            std::to_string(expected_fields - 1) +
                                            " channel columns, header is '" + line + "'");
        throw FormatError("line 1: header must be exactly '" + expected_header + "'");
    }

    Table table;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        auto fields = split(line, ',');
        if (fields.size() != expected_fields) {
            if (spectral_layout)
                throw ChannelCountMismatchError("line " + std::to_string(line_no) + ": expected " +
                                                std::to_string(expected_fields) + " columns, got " +
                                                std::to_string(fields.size()));
            throw FormatError("line " + std::to_string(line_no) + ": expected " +
                              std::to_string(expected_fields) + " columns, got " +
                              std::to_string(fields.size()));
        }
        const double t = parse_number(fields[0], line_no);
        if (!table.times.empty() && t <= table.times.back())
            throw FormatError("line " + std::to_string(line_no) +
                              ": time column must be strictly increasing");
        table.times.push_back(t);
        std::vector<double> row;
        row.reserve(expected_fields - 1);
        for (std::size_t i = 1; i < fields.size(); ++i)
            row.push_back(parse_number(fields[i], line_no));
        table.rows.push_back(std::move(row));
    }
    if (table.times.empty()) throw FormatError("line 1: file holds a header but no samples");

    if (table.times.size() >= 3) {
        const double dt0 = table.times[1] - table.times[0];
        for (std::size_t i = 2; i < table.times.size(); ++i) {
            const double dt = table.times[i] - table.times[i - 1];
            if (std::abs(dt - dt0) > kUniformityTolerance * dt0)
                throw NonUniformSamplingError("line " + std::to_string(i + 2) +
                                              ": sample spacing deviates more than 1% from " +
                                              format_g9(dt0) + " s");
        }
    }
    return table;
}

double rate_from_times(const std::vector<double>& times) {
    if (times.size() < 2) return 0.0;
    return static_cast<double>(times.size() - 1) / (times.back() - times.front());
}

void append_byte(std::vector<std::uint8_t>& out, std::uint8_t b) { out.push_back(b); }

void append_u16(std::vector<std::uint8_t>& out, std::uint16_t v) {
    out.push_back(static_cast<std::uint8_t>(v & 0xFF));
    out.push_back(static_cast<std::uint8_t>(v >> 8));
}

void append_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
    for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>((v >> (8 * i)) & 0xFF));
}

std::uint16_t read_u16(const std::uint8_t* p) {
    return static_cast<std::uint16_t>(p[0] | (p[1] << 8));
}

std::uint32_t read_u32(const std::uint8_t* p) {
    return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
           (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}

std::uint8_t xor_checksum(const std::uint8_t* p, std::size_t n) {
    std::uint8_t acc = 0;
    for (std::size_t i = 0; i < n; ++i) acc ^= p[i];
    return acc;
}

}  // namespace

IrTrace read_ir_csv(const std::string& text) {
    const Table table = read_table(text, "time,voltage", 2, false);
    IrTrace trace;
    trace.t0_s = table.times.front();
    trace.sample_rate_hz = table.times.size() >= 2 ? rate_from_times(table.times) : 100.0;
    trace.samples.reserve(table.rows.size());
    for (const auto& row : table.rows) trace.samples.push_back(row[0]);
    return trace;
}

std::string write_ir_csv(const IrTrace& trace) {
    std::string out = "time,voltage\n";
    for (std::size_t i = 0; i < trace.samples.size(); ++i) {
        out += format_g9(trace.time_at(i));
        out += ',';
        out += format_g9(trace.samples[i]);
        out += '\n';
    }
    return out;
}

SpectralTrace read_spectral_csv(const std::string& text) {
    const Table table =
        read_table(text, "time,violet,blue,green,yellow,orange,red", 7, true);
    SpectralTrace trace;
    trace.t0_s = table.times.front();
    trace.sample_rate_hz = table.times.size() >= 2 ? rate_from_times(table.times) : 20.0;
    trace.samples.reserve(table.rows.size());
    for (const auto& row : table.rows) {
        SpectralSample s;
        std::copy(row.begin(), row.end(), s.channels.begin());
        trace.samples.push_back(s);
    }
    return trace;
}

std::string write_spectral_csv(const SpectralTrace& trace) {
    std::string out = "time,violet,blue,green,yellow,orange,red\n";
    for (std::size_t i = 0; i < trace.samples.size(); ++i) {
        out += format_g9(trace.time_at(i));
        for (double c : trace.samples[i].channels) {
            out += ',';
            out += format_g9(c);
        }
        out += '\n';
    }
    return out;
}

spectral::ReferenceLibrary read_reference_library(const std::string& text) {
    spectral::ReferenceLibrary lib;
    std::istringstream in(text);
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty() || line[0] == '#') continue;
        std::istringstream fields(line);
        spectral::ReferenceEntry entry;
        if (!(fields >> entry.label))
            throw FormatError("line " + std::to_string(line_no) + ": missing label");
        for (std::size_t c = 0; c < entry.signature.normalized.size(); ++c) {
            if (!(fields >> entry.signature.normalized[c]))
                throw FormatError("line " + std::to_string(line_no) +
                                  ": expected 6 values after the label");
        }
        std::string extra;
        if (fields >> extra)
            throw FormatError("line " + std::to_string(line_no) + ": trailing field '" + extra +
                              "'");
        for (const auto& existing : lib.entries)
            if (existing.label == entry.label)
                throw FormatError("line " + std::to_string(line_no) + ": duplicate label '" +
                                  entry.label + "'");
        lib.entries.push_back(std::move(entry));
    }
    return lib;
}

std::string write_reference_library(const spectral::ReferenceLibrary& lib) {
    std::string out;
    for (const auto& entry : lib.entries) {
        out += entry.label;
        for (double v : entry.signature.normalized) {
            out += ' ';
            out += format_g9(v);
        }
        out += '\n';
    }
    return out;
}

std::string read_text_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw FormatError("cannot open '" + path + "' for reading");
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

void write_text_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw FormatError("cannot open '" + path + "' for writing");
    out << content;
    if (!out) throw FormatError("write to '" + path + "' failed");
}

std::vector<std::uint8_t> encode_frame(const SensorFrame& frame) {
    std::vector<std::uint8_t> out;
    out.reserve(frame.kind == kFrameKindIr ? kIrFrameLength : kSpectralFrameLength);
    append_byte(out, kFrameSync);
    append_byte(out, frame.kind);
    append_u32(out, frame.timestamp_ms);
    if (frame.kind == kFrameKindIr) {
        append_u16(out, frame.ir_counts);
    } else if (frame.kind == kFrameKindSpectral) {
        for (std::uint16_t c : frame.spectral_counts) append_u16(out, c);
    } else {
        throw std::invalid_argument("encode_frame: unknown frame kind");
    }
    append_byte(out, xor_checksum(out.data(), out.size()));
    return out;
}

std::vector<std::uint8_t> encode_frames(const std::vector<SensorFrame>& frames) {
    std::vector<std::uint8_t> out;
    for (const auto& f : frames) {
        const auto bytes = encode_frame(f);
        out.insert(out.end(), bytes.begin(), bytes.end());
    }
    return out;
}

FrameDecodeResult decode_frames(const std::vector<std::uint8_t>& stream) {
    FrameDecodeResult result;
    std::size_t pos = 0;
    bool in_error_run = false;
    auto note_skip = [&] {
        if (!in_error_run) {
            ++result.checksum_errors;
            in_error_run = true;
        }
    };

    while (pos < stream.size()) {
        if (stream[pos] != kFrameSync) {
            note_skip();
            ++pos;
            continue;
        }
        if (pos + 2 > stream.size()) break;  // sync byte only; incomplete tail
        const std::uint8_t kind = stream[pos + 1];
        std::size_t length = 0;
        if (kind == kFrameKindIr) length = kIrFrameLength;
        else if (kind == kFrameKindSpectral) length = kSpectralFrameLength;
        if (length == 0) {
            note_skip();
            ++pos;
            continue;
        }
        if (pos + length > stream.size()) break;  // truncated final frame
        const std::uint8_t* p = stream.data() + pos;
        if (xor_checksum(p, length - 1) != p[length - 1]) {
            note_skip();
            ++pos;
            continue;
        }
        SensorFrame frame;
        frame.kind = kind;
        frame.timestamp_ms = read_u32(p + 2);
        if (kind == kFrameKindIr) {
            frame.ir_counts = read_u16(p + 6);
        } else {
            for (std::size_t c = 0; c < 6; ++c)
                frame.spectral_counts[c] = read_u16(p + 6 + 2 * c);
        }
        result.frames.push_back(frame);
        pos += length;
        in_error_run = false;
    }
    result.trailing_bytes = stream.size() - pos;
    return result;
}

double ir_counts_to_volts(std::uint16_t counts) {
    return static_cast<double>(counts) * 5.0 / 65535.0;
}

std::uint16_t ir_volts_to_counts(double volts) {
    const double clamped = std::clamp(volts, 0.0, 5.0);
    return static_cast<std::uint16_t>(std::lround(clamped * 65535.0 / 5.0));
}

}  // namespace dropletlink::io
