"""Key distillation is possible while H(Q) + H(P_corr) < 1."""
from qdkd import security as sec

rep = sec.security_condition(0.033, 0.05)
print("measured-style rates Q=0.033, P_corr=0.05")
print(f"  I_AB = {rep.i_ab:.3f}, Eve bound = {rep.eve_bound:.3f}, margin = {rep.margin:.3f}, secure = {rep.secure}")

print("\nboundary of the secure region")
for q, p in sec.security_region(11):
    print(f"  Q={q:.2f}  P_corr < {p:.4f}")
