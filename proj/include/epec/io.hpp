#pragma once

#include <zlib.h>

#include <cstdint>
#include <cstdio>
#include <string>
#include <string_view>
#include <vector>

#include "epec/error.hpp"

namespace epec {

// Line reader over a file that may or may not be gzip-compressed; zlib's
// gz* layer reads both transparently. Stream corruption surfaces as
// GzipCorrupt with the byte position known to zlib.
class GzLineReader {
public:
    explicit GzLineReader(const std::string& path) : path_(path) {
        file_ = gzopen(path.c_str(), "rb");
        if (file_ == nullptr) fail(errc::io_error, "cannot open '" + path + "'");
        gzbuffer(file_, 1 << 16);
    }

    GzLineReader(const GzLineReader&) = delete;
    GzLineReader& operator=(const GzLineReader&) = delete;

    ~GzLineReader() {
        if (file_ != nullptr) gzclose(file_);
    }

    // Reads the next line (without the trailing newline) into `out`.
    // Returns false at a clean end of file.
    bool next_line(std::string& out) {
        out.clear();
        while (true) {
            if (pos_ < buffer_.size()) {
                std::size_t nl = buffer_.find('\n', pos_);
                if (nl != std::string::npos) {
                    out.append(buffer_, pos_, nl - pos_);
                    pos_ = nl + 1;
                    strip_cr(out);
                    return true;
                }
                out.append(buffer_, pos_, buffer_.size() - pos_);
                pos_ = buffer_.size();
            }
            if (eof_) {
                strip_cr(out);
                return !out.empty();
            }
            refill();
        }
    }

private:
    static void strip_cr(std::string& s) {
        if (!s.empty() && s.back() == '\r') s.pop_back();
    }

    void refill() {
        char chunk[1 << 15];
        int n = gzread(file_, chunk, sizeof(chunk));
        if (n < 0) {
            int zerr = 0;
            const char* msg = gzerror(file_, &zerr);
            fail(errc::gzip_corrupt, "'" + path_ + "': " + (msg != nullptr ? msg : "read error"));
        }
        if (n == 0) {
            // gzread can report a truncated gzip stream only at EOF.
            int zerr = 0;
            gzerror(file_, &zerr);
            if (zerr != Z_OK && zerr != Z_STREAM_END)
                fail(errc::gzip_corrupt, "'" + path_ + "': truncated or corrupt stream");
            eof_ = true;
        }
        buffer_.assign(chunk, static_cast<std::size_t>(n));
        pos_ = 0;
    }

    std::string path_;
    gzFile file_ = nullptr;
    std::string buffer_;
    std::size_t pos_ = 0;
    bool eof_ = false;
};

// Writer that gzip-compresses when the path ends in ".gz" and writes plain
// text otherwise.
class GzLineWriter {
public:
    explicit GzLineWriter(const std::string& path) : path_(path) {
        if (path.size() > 3 && path.compare(path.size() - 3, 3, ".gz") == 0) {
            gz_ = gzopen(path.c_str(), "wb");
            if (gz_ == nullptr) fail(errc::io_error, "cannot open '" + path + "' for writing");
        } else {
            plain_ = std::fopen(path.c_str(), "wb");
            if (plain_ == nullptr) fail(errc::io_error, "cannot open '" + path + "' for writing");
        }
    }

    GzLineWriter(const GzLineWriter&) = delete;
    GzLineWriter& operator=(const GzLineWriter&) = delete;

    ~GzLineWriter() { close(); }

    void write(std::string_view text) {
        if (gz_ != nullptr) {
            if (gzwrite(gz_, text.data(), static_cast<unsigned>(text.size())) !=
                static_cast<int>(text.size()))
                fail(errc::io_error, "write failed on '" + path_ + "'");
        } else if (plain_ != nullptr) {
            if (std::fwrite(text.data(), 1, text.size(), plain_) != text.size())
                fail(errc::io_error, "write failed on '" + path_ + "'");
        }
    }

    void write_line(std::string_view text) {
        write(text);
        write("\n");
    }

    void close() {
        if (gz_ != nullptr) {
            gzclose(gz_);
            gz_ = nullptr;
        }
        if (plain_ != nullptr) {
            std::fclose(plain_);
            plain_ = nullptr;
        }
    }

private:
    std::string path_;
    gzFile gz_ = nullptr;
    std::FILE* plain_ = nullptr;
};

// RFC-4180 style field splitting: commas separate, double quotes group,
// doubled quotes escape inside a quoted field.
inline std::vector<std::string> split_csv_line(std::string_view line) {
    std::vector<std::string> fields;
    std::string current;
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        const char c = line[i];
        if (quoted) {
            if (c == '"') {
                if (i + 1 < line.size() && line[i + 1] == '"') {
                    current.push_back('"');
                    ++i;
                } else {
                    quoted = false;
                }
            } else {
                current.push_back(c);
            }
        } else if (c == '"') {
            quoted = true;
        } else if (c == ',') {
            fields.push_back(std::move(current));
            current.clear();
        } else {
            current.push_back(c);
        }
    }
    fields.push_back(std::move(current));
    return fields;
}

inline std::string csv_escape(std::string_view field) {
    if (field.find_first_of(",\"\n\r") == std::string_view::npos) return std::string(field);
    std::string out = "\"";
    for (char c : field) {
        if (c == '"') out += "\"\"";
        else out.push_back(c);
    }
    out.push_back('"');
    return out;
}

inline std::string join_csv(const std::vector<std::string>& fields) {
    std::string line;
    for (std::size_t i = 0; i < fields.size(); ++i) {
        if (i > 0) line.push_back(',');
        line += csv_escape(fields[i]);
    }
    return line;
}

// CRC32 (zlib) of a file plus its byte size, for run manifests.
struct FileDigest {
    std::string path;
    std::string crc32_hex;
    std::uint64_t bytes = 0;
};

inline FileDigest digest_file(const std::string& path) {
    std::FILE* f = std::fopen(path.c_str(), "rb");
    if (f == nullptr) fail(errc::io_error, "cannot open '" + path + "'");
    FileDigest d;
    d.path = path;
    uLong crc = crc32(0L, Z_NULL, 0);
    char buf[1 << 15];
    std::size_t n = 0;
    while ((n = std::fread(buf, 1, sizeof(buf), f)) > 0) {
        crc = crc32(crc, reinterpret_cast<const Bytef*>(buf), static_cast<uInt>(n));
        d.bytes += n;
    }
    std::fclose(f);
    char hex[16];
    std::snprintf(hex, sizeof(hex), "%08lx", static_cast<unsigned long>(crc));
    d.crc32_hex = hex;
    return d;
}

} // namespace epec
