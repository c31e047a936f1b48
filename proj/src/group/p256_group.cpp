// Copyright 2026 The QoeSiGN Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <openssl/bn.h>
#include <openssl/ec.h>
#include <openssl/obj_mac.h>

#include <memory>

#include "qoesign/group/group.hpp"

namespace qoesign {

namespace {

struct BnDeleter {
  void operator()(BIGNUM* b) const { BN_free(b); }
};
struct BnCtxDeleter {
  void operator()(BN_CTX* c) const { BN_CTX_free(c); }
};
struct PointDeleter {
  void operator()(EC_POINT* p) const { EC_POINT_free(p); }
};
struct GroupDeleter {
  void operator()(EC_GROUP* g) const { EC_GROUP_free(g); }
};

using BnPtr = std::unique_ptr<BIGNUM, BnDeleter>;
using BnCtxPtr = std::unique_ptr<BN_CTX, BnCtxDeleter>;
using PointPtr = std::unique_ptr<EC_POINT, PointDeleter>;

constexpr std::size_t kElementSize = 33;
constexpr std::size_t kScalarSize = 32;

[[noreturn]] void fail(const char* what) { throw Error(ErrorCode::Io, std::string("libcrypto ec: ") + what); }

class P256Group final : public Group {
 public:
  P256Group() : id_("p256"), group_(EC_GROUP_new_by_curve_name(NID_X9_62_prime256v1)) {
    if (!group_) fail("curve unavailable");
    const BIGNUM* order = EC_GROUP_get0_order(group_.get());
    Bytes buf(kScalarSize);
    if (BN_bn2binpad(order, buf.data(), static_cast<int>(buf.size())) < 0) fail("order");
    order_ = big_from_be(buf);
    generator_ = encode_point(EC_GROUP_get0_generator(group_.get()), ctx().get());
  }

  const std::string& id() const override { return id_; }
  const BigInt& order() const override { return order_; }
  std::size_t element_size() const override { return kElementSize; }
  std::size_t scalar_size() const override { return kScalarSize; }

  Element generator() const override { return generator_; }
  Element identity() const override { return Element{Bytes(kElementSize, 0)}; }

  Element op(const Element& a, const Element& b) const override {
    auto c = ctx();
    auto pa = decode_point(a, c.get());
    auto pb = decode_point(b, c.get());
    PointPtr r(EC_POINT_new(group_.get()));
    if (!r || EC_POINT_add(group_.get(), r.get(), pa.get(), pb.get(), c.get()) != 1) fail("add");
    return encode_point(r.get(), c.get());
  }

  Element exp(const Element& base, const FieldElement& k) const override {
    check_scalar(k);
    auto c = ctx();
    auto p = decode_point(base, c.get());
    auto bn = to_bn(k);
    PointPtr r(EC_POINT_new(group_.get()));
    if (!r || EC_POINT_mul(group_.get(), r.get(), nullptr, p.get(), bn.get(), c.get()) != 1) fail("mul");
    return encode_point(r.get(), c.get());
  }

  Element exp_generator(const FieldElement& k) const override {
    check_scalar(k);
    auto c = ctx();
    auto bn = to_bn(k);
    PointPtr r(EC_POINT_new(group_.get()));
    if (!r || EC_POINT_mul(group_.get(), r.get(), bn.get(), nullptr, nullptr, c.get()) != 1) fail("mul");
    return encode_point(r.get(), c.get());
  }

  Element decode(ByteView bytes) const override {
    if (bytes.size() != kElementSize) throw Error(ErrorCode::Decode, "p256 element must be 33 bytes");
    Element e{Bytes(bytes.begin(), bytes.end())};
    auto c = ctx();
    decode_point(e, c.get());
    return e;
  }

 private:
  static BnCtxPtr ctx() {
    BnCtxPtr c(BN_CTX_new());
    if (!c) fail("ctx");
    return c;
  }

  void check_scalar(const FieldElement& k) const {
    if (k.modulus() != order_) throw Error(ErrorCode::Parameter, "exponent is not in this group's field");
  }

  static BnPtr to_bn(const FieldElement& k) {
    Bytes buf = big_to_be(k.value(), kScalarSize);
    BnPtr bn(BN_bin2bn(buf.data(), static_cast<int>(buf.size()), nullptr));
    if (!bn) fail("bn");
    return bn;
  }

  PointPtr decode_point(const Element& e, BN_CTX* c) const {
    if (e.encoding.size() != kElementSize) throw Error(ErrorCode::Decode, "p256 element must be 33 bytes");
    PointPtr p(EC_POINT_new(group_.get()));
    if (!p) fail("point");
    bool all_zero = std::all_of(e.encoding.begin(), e.encoding.end(), [](std::uint8_t b) { return b == 0; });
    if (all_zero) {
      if (EC_POINT_set_to_infinity(group_.get(), p.get()) != 1) fail("infinity");
      return p;
    }
    if (e.encoding[0] != 0x02 && e.encoding[0] != 0x03) throw Error(ErrorCode::Decode, "p256 element not compressed");
    if (EC_POINT_oct2point(group_.get(), p.get(), e.encoding.data(), e.encoding.size(), c) != 1) {
      throw Error(ErrorCode::Decode, "p256 element is not on the curve");
    }
    return p;
  }

  Element encode_point(const EC_POINT* p, BN_CTX* c) const {
    if (EC_POINT_is_at_infinity(group_.get(), p) == 1) return identity();
    Bytes out(kElementSize);
    if (EC_POINT_point2oct(group_.get(), p, POINT_CONVERSION_COMPRESSED, out.data(), out.size(), c) != kElementSize) {
      fail("encode");
    }
    return Element{std::move(out)};
  }

  std::string id_;
  std::unique_ptr<EC_GROUP, GroupDeleter> group_;
  BigInt order_;
  Element generator_;
};

}  // namespace

GroupPtr p256_group() {
  static const GroupPtr instance = std::make_shared<P256Group>();
  return instance;
}

}  // namespace qoesign
