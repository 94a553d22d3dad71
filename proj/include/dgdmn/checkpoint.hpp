#pragma once

#include "dgdmn/baselines.hpp"
#include "dgdmn/dual_memory.hpp"
#include "dgdmn/metrics.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace dgdmn {

// Checkpoint container: magic "DGDM", format version u16, then length-prefixed
// sections. All integers little-endian, all floats 32-bit. Saving a loaded
// checkpoint reproduces the file byte for byte.

constexpr std::uint16_t kCheckpointVersion = 1;

enum class SectionKind : std::uint32_t {
    meta = 1,      // run identity: algorithm, suite, seed, position, config text
    algorithm = 2, // algorithm-specific state
    matrix = 3,    // accuracy rows recorded so far
};

class ByteWriter {
public:
    void u8(std::uint8_t v);
    void u16(std::uint16_t v);
    void u32(std::uint32_t v);
    void u64(std::uint64_t v);
    void f32(double v); // narrowed to float on the wire
    void str(const std::string& s);
    void raw(const void* p, std::size_t n);

    const std::vector<std::uint8_t>& bytes() const { return bytes_; }
    std::vector<std::uint8_t> take() { return std::move(bytes_); }

private:
    std::vector<std::uint8_t> bytes_;
};

class ByteReader {
public:
    ByteReader(const std::uint8_t* data, std::size_t size) : data_(data), size_(size) {}
    explicit ByteReader(const std::vector<std::uint8_t>& v) : ByteReader(v.data(), v.size()) {}

    std::uint8_t u8();
    std::uint16_t u16();
    std::uint32_t u32();
    std::uint64_t u64();
    double f32();
    std::string str();
    void raw(void* p, std::size_t n);
    std::size_t remaining() const { return size_ - pos_; }

private:
    void need(std::size_t n) const;
    const std::uint8_t* data_;
    std::size_t size_;
    std::size_t pos_ = 0;
};

// --- typed payload helpers ------------------------------------------------

void write_tensor(ByteWriter& w, const Tensor& t);
Tensor read_tensor(ByteReader& r);

void write_params(ByteWriter& w, const num::ParamSet& p);
num::ParamSet read_params(ByteReader& r);

void write_dgm(ByteWriter& w, const DgmState& dgm);
DgmState read_dgm(ByteReader& r);

void write_dgdmn(ByteWriter& w, const DgdmnState& state);
DgdmnState read_dgdmn(ByteReader& r);

void write_learner(ByteWriter& w, const LearnerParams& lp);
LearnerParams read_learner(ByteReader& r);

void write_ewc(ByteWriter& w, const EwcState& e);
EwcState read_ewc(ByteReader& r);

void write_ppr(ByteWriter& w, const PprMemory& m);
PprMemory read_ppr(ByteReader& r);

void write_matrix(ByteWriter& w, const AccuracyMatrix& a);
AccuracyMatrix read_matrix(ByteReader& r);

// --- container --------------------------------------------------------------

struct CheckpointSection {
    SectionKind kind;
    std::vector<std::uint8_t> payload;
};

struct Checkpoint {
    std::uint16_t version = kCheckpointVersion;
    std::vector<CheckpointSection> sections;

    const CheckpointSection& section(SectionKind kind) const;
};

std::vector<std::uint8_t> encode_checkpoint(const Checkpoint& c);
// Throws CheckpointError on bad magic, a version mismatch (reporting both
// versions), or truncation; no partial state escapes.
Checkpoint decode_checkpoint(const std::vector<std::uint8_t>& bytes);

void save_checkpoint_file(const std::string& path, const Checkpoint& c);
Checkpoint load_checkpoint_file(const std::string& path);

} // namespace dgdmn
