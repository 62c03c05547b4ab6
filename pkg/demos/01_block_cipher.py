"""The DES block cipher on its own: key schedule, one block each way,
and the structural properties the tests lean on.

Run:  python demos/01_block_cipher.py
"""

import random

from encmips import des

###############################################################################
# A key schedule is 16 48-bit round subkeys derived from a 64-bit key.
# The 8 parity bits (the low bit of each byte) never influence it.

key = 0x133457799BBCDFF1
sched = des.key_schedule(key)
print(f"key       = {key:016x}")
print(f"subkey 1  = {sched[0]:012x}")
print(f"subkey 16 = {sched[15]:012x}")
assert des.key_schedule(key ^ 0x01) == sched  # parity bit, ignored

###############################################################################
# One block through the cipher and back. This is the classic textbook
# vector, so the ciphertext should look familiar.

plaintext = 0x0123456789ABCDEF
ciphertext = des.encrypt_block(plaintext, sched)
print(f"\nencrypt({plaintext:016x}) = {ciphertext:016x}")
print(f"decrypt({ciphertext:016x}) = {des.decrypt_block(ciphertext, sched):016x}")

###############################################################################
# The processor stores 32-bit words zero-padded into the low half of a
# 64-bit block; that block is what DES sees. The full worked example ends
# by encrypting one such block under the key "KIRATPAL".

key = 0x4B4952415450414C
block = des.pad_word(0xCB97F7EE)
print(f"\npad(cb97f7ee)          = {block:016x}")
print(f"encrypt under KIRATPAL = {des.encrypt_block(block, des.key_schedule(key)):016x}")

###############################################################################
# Two structural properties unique enough to catch table typos:
# complementation (inverting key and plaintext inverts the ciphertext) and
# avalanche (one flipped plaintext bit flips about half the output bits).

rng = random.Random(1)
full = (1 << 64) - 1
k, x = rng.getrandbits(64), rng.getrandbits(64)
a = des.encrypt_block(x, des.key_schedule(k))
b = des.encrypt_block(x ^ full, des.key_schedule(k ^ full))
print(f"\ncomplementation holds: {a ^ full == b}")

flips = []
sched = des.key_schedule(k)
for _ in range(200):
    bit = 1 << rng.randrange(64)
    flips.append(bin(des.encrypt_block(x, sched)
                     ^ des.encrypt_block(x ^ bit, sched)).count("1"))
print(f"avalanche: flipping 1 input bit flips {sum(flips) / len(flips):.1f} "
      "of 64 output bits on average")
