"""Independent oracle: frozen vectors for seed derivation and noise sampling tests."""
import hashlib
import struct
import numpy as np

# derive_seed vectors: SHA-256(LE64(i) || salt)
salt0 = bytes(32)
for i in (0, 1, 7):
    msg = struct.pack("<Q", i) + salt0
    print(f"derive_seed(i={i}, salt=0^32) = {hashlib.sha256(msg).hexdigest()}")

salt1 = bytes(range(32))
print("derive_seed(i=3, salt=00..1f) =", hashlib.sha256(struct.pack("<Q", 3) + salt1).hexdigest())

# ChaCha20 keystream oracle (pure python, RFC 8439), key=seed, nonce=0^12, counter from 0
def rotl32(x, n):
    return ((x << n) | (x >> (32 - n))) & 0xFFFFFFFF

def quarter(s, a, b, c, d):
    s[a] = (s[a] + s[b]) & 0xFFFFFFFF; s[d] = rotl32(s[d] ^ s[a], 16)
    s[c] = (s[c] + s[d]) & 0xFFFFFFFF; s[b] = rotl32(s[b] ^ s[c], 12)
    s[a] = (s[a] + s[b]) & 0xFFFFFFFF; s[d] = rotl32(s[d] ^ s[a], 8)
    s[c] = (s[c] + s[d]) & 0xFFFFFFFF; s[b] = rotl32(s[b] ^ s[c], 7)

def chacha_block(key, counter, nonce):
    const = b"expand 32-byte k"
    state = list(struct.unpack("<4I", const)) + list(struct.unpack("<8I", key)) \
        + [counter] + list(struct.unpack("<3I", nonce))
    w = state[:]
    for _ in range(10):
        quarter(w, 0, 4, 8, 12); quarter(w, 1, 5, 9, 13)
        quarter(w, 2, 6, 10, 14); quarter(w, 3, 7, 11, 15)
        quarter(w, 0, 5, 10, 15); quarter(w, 1, 6, 11, 12)
        quarter(w, 2, 7, 8, 13); quarter(w, 3, 4, 9, 14)
    out = [(w[i] + state[i]) & 0xFFFFFFFF for i in range(16)]
    return struct.pack("<16I", *out)

def keystream(key, nbytes):
    out = b""
    ctr = 0
    while len(out) < nbytes:
        out += chacha_block(key, ctr, bytes(12))
        ctr += 1
    return out[:nbytes]

ks = keystream(bytes(32), 64)
print("chacha20 zero key/nonce block0 =", ks.hex())
# cross-check against RFC 8439 A.1 vector #1
assert ks[:16].hex() == "76b8e0ada0f13d90405d6ae55386bd28"

# sample_noise oracle: first 8 values for seed = 0^32 and seed = derive_seed(7, 0^32)
def noise_values(seed, count):
    nb = ((count + 1) // 2) * 16  # 2 u64 per pair of outputs
    ks = keystream(seed, nb)
    words = struct.unpack("<%dQ" % (nb // 8), ks)
    out = []
    for p in range(len(words) // 2):
        u1 = ((words[2 * p] >> 11) + 1) * 2.0 ** -53
        u2 = ((words[2 * p + 1] >> 11) + 1) * 2.0 ** -53
        r = np.sqrt(-2.0 * np.log(u1))
        out.append(r * np.cos(2.0 * np.pi * u2))
        out.append(r * np.sin(2.0 * np.pi * u2))
    return out[:count]

for name, seed in (("zero", bytes(32)), ("seed7", hashlib.sha256(struct.pack("<Q", 7) + salt0).digest())):
    vals = noise_values(seed, 8)
    print(f"noise[{name}] =", ", ".join(f"{v!r}" for v in vals))

# moments sanity at d=16384
v = np.array(noise_values(bytes(32), 16384))
print("zero-seed tensor mean/std:", v.mean(), v.std())
