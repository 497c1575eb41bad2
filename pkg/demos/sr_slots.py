"""Which slots can carry a scheduling request, and how long a ready UE waits for one."""
from ranlat.core import ControlAndTiming, TddPattern, tdd_config
from ranlat.sr import compute_w1, sr_slot_set, sr_slot_set_oracle

# DDDUU frame (T=5, 3 DL slots), SR every 5 slots starting at slot 3
pattern, ctrl = TddPattern(5, 3), ControlAndTiming(5, 3)
s = sr_slot_set(pattern, ctrl)
print("usable multipliers", s.A, "UL residues", s.B)
assert s == sr_slot_set_oracle(pattern, ctrl)

# a period that never lands in UL
print("T=4 d=2 P=4 O=0 ->", sr_slot_set(TddPattern(4, 2), ControlAndTiming(4, 0)).A or "unreachable")

cfg = tdd_config(0.5, 5, 3, 1, 0, advance_slots=1)
for o1 in (0.0, 0.7, 1.4, 2.1):
    print(f"arrival {o1:.1f} ms, 0.2 ms prep -> SR wait w1 = {compute_w1(cfg, o1, 0.2):+.2f} ms")
