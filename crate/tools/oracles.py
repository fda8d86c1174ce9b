# Independent high-precision oracles (mpmath, 40 digits).
from mpmath import mp, mpf, sinh, cosh, tanh, sqrt, asinh, findroot, diff, matrix, eig, sign, log, exp
mp.dps = 40
one = mpf(1)
# Lorentz, a=c=rho*=sigma_bar=1, homographic sigma = -r/(r+1)
sig = lambda r: -r/(r+1)
sp = lambda r: -1/(r+1)**2
spp = lambda r: 2/(r+1)**3
q = lambda r: r*(r+1)
def lor_lift(th, r0):
    return r0 + sinh(th)**2*q(r0), sinh(th)*cosh(th)*q(r0)
print("lorentz lift(0.2,0.4):", [mp.nstr(v, 20) for v in lor_lift(mpf('0.2'), mpf('0.4'))])
def lor_project(rho, J):
    F = lambda r0: r0 + (sqrt(q(r0)**2 + 4*J**2) - q(r0))/2 - rho
    lo, hi = mpf(0), mpf('0.5')
    for _ in range(60):
        m = (lo+hi)/2
        if F(m) < 0: lo = m
        else: hi = m
    r0 = findroot(F, (lo+hi)/2)
    return asinh(2*J/q(r0))/2, r0
def lor_flux(rho, J):
    th, r0 = lor_project(rho, J)
    u = tanh(th)
    p0 = r0**2
    return [rho*u + sinh(th)*p0/cosh(th), J*u + cosh(th)*p0/cosh(th)]
rho, J = mpf('0.4'), mpf('0.2')
th, r0 = lor_project(rho, J)
C, S = cosh(th), sinh(th)
eta = C*sig(r0); sstar = r0*sp(r0) - sig(r0)
alpha, beta = C*sp(r0), -S*sp(r0)
f = lor_flux(rho, J)
Jm = matrix([[diff(lambda x: lor_flux(x, J)[i], rho), diff(lambda y: lor_flux(rho, y)[i], J)] for i in range(2)])
ev = sorted(eig(Jm)[0], key=lambda z: z.real)
z0 = 1 - sig(r0)*spp(r0)/sp(r0)**2
delta = S**2*z0 - (C**2 + S**2)
Delta = delta*q(r0)
E = lambda x, y: cosh(lor_project(x, y)[0])*sig(lor_project(x, y)[1])
H = matrix([[diff(E, (rho, J), (2, 0)), diff(E, (rho, J), (1, 1))], [diff(E, (rho, J), (1, 1)), diff(E, (rho, J), (0, 2))]])
out = dict(theta=th, rho0=r0, u=tanh(th), eta=eta, eta_star=C*sstar, alpha=alpha, beta=beta, p0=r0**2,
           f1=f[0], f2=f[1], g1=f[0]-tanh(th)*rho, g2=f[1]-tanh(th)*J, lambda1=ev[0].real, lambda2=ev[1].real,
           delta=Delta, det_hessian=H[0,0]*H[1,1]-H[0,1]**2, d2eta_drho2=H[0,0])
for k, v in out.items(): print("lorentz inspect", k, mp.nstr(v, 20))
# circular, a=c=rho*=sigma_bar=1
def circ_flux(rho, J):
    psi = 2*J; r = sqrt(1-psi**2); r0 = rho + (1-r)/2
    u = sign(J)*sqrt((1-r)/(1+r))
    return [J, u*J + (r0 - 1)]
def radius(w):
    M = matrix([[diff(lambda x: circ_flux(x, w[1])[i], w[0]), diff(lambda y: circ_flux(w[0], y)[i], w[1])] for i in range(2)])
    return max(abs(z) for z in eig(M)[0])
wl, wr = (mpf(1), mpf('0.1')), (mpf(1), mpf('-0.1'))
s = max(radius(wl), radius(wr))
fl, fr = circ_flux(*wl), circ_flux(*wr)
F = [(fl[i]+fr[i])/2 - s*(wr[i]-wl[i])/2 for i in range(2)]
print("circular rusanov s", mp.nstr(s, 20), "F", [mp.nstr(v, 20) for v in F])
