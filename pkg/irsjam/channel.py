""" Channel realizations for an AP / IRS / multi-user downlink.

The direct AP->LU channels are Rayleigh faded; the AP->IRS matrix G and
the IRS->LU vectors h_I,k are Rician, with line-of-sight parts built from
array responses evaluated along the straight rays between the endpoints.
All large-scale losses follow log-distance laws given in dB.

Array conventions
-----------------
- The AP carries a uniform linear array along the y-axis.
- The IRS is a uniform planar array in the y-z plane; its response is
  flattened z-major (index = m_z*n_y + m_y).
- Element 0 is the phase reference of every array.

"""

import logging
import hashlib
from collections import namedtuple

import numpy as np

from . utilities import complex_normal, db_to_linear

logger = logging.getLogger(__name__)

__all__ = ['Geometry', 'ArraySpec', 'FadingSpec', 'ChannelSet',
           'path_loss_db', 'ula_response', 'upa_response',
           'sample_geometry', 'sample_channels', 'assemble_combined']

#: Largest Rician factor accepted; an infinite factor is not representable
KAPPA_MAX = 1e12


def _as_point(p):
    p = np.asarray(p, dtype=float)
    if p.shape != (3, ):
        raise ValueError("expected a 3D point; got shape %r" % (p.shape, ))
    return p


class Geometry(namedtuple('Geometry', ['ap_position', 'irs_position',
                                       'lu_positions', 'lu_cluster_center',
                                       'lu_cluster_radius'])):
    """ Node placement for one trial (all coordinates in meters).

    Derived distances (`d_direct`, `d_ap_irs`, `d_irs_lu`) are those used
    by the path-loss laws; they must all be strictly positive.

    """
    __slots__ = ()

    def __new__(cls, ap_position, irs_position, lu_positions,
                lu_cluster_center, lu_cluster_radius):
        lu_positions = np.atleast_2d(np.asarray(lu_positions, dtype=float))
        if lu_positions.ndim != 2 or lu_positions.shape[1] != 3:
            raise ValueError("lu_positions must be a K x 3 array")
        if lu_positions.shape[0] < 1:
            raise ValueError("need at least one LU")
        self = super(Geometry, cls).__new__(
            cls, _as_point(ap_position), _as_point(irs_position),
            lu_positions, _as_point(lu_cluster_center),
            float(lu_cluster_radius)
        )
        for name, d in [('AP-LU', self.d_direct), ('AP-IRS', self.d_ap_irs),
                        ('IRS-LU', self.d_irs_lu)]:
            if np.any(np.asarray(d) <= 0):
                raise ValueError("degenerate geometry: zero %s distance"
                                 % name)
        return self

    @property
    def k_users(self):
        return self.lu_positions.shape[0]

    @property
    def d_direct(self):
        return np.linalg.norm(self.lu_positions - self.ap_position, axis=1)

    @property
    def d_ap_irs(self):
        return float(np.linalg.norm(self.irs_position - self.ap_position))

    @property
    def d_irs_lu(self):
        return np.linalg.norm(self.lu_positions - self.irs_position, axis=1)


class ArraySpec(namedtuple('ArraySpec', ['n_ap', 'n_irs_y', 'n_irs_z',
                                         'element_spacing'])):
    """ AP ULA size, IRS UPA dimensions and element spacing (in
    wavelengths). """
    __slots__ = ()

    def __new__(cls, n_ap, n_irs_y, n_irs_z, element_spacing=0.5):
        n_ap, n_irs_y, n_irs_z = int(n_ap), int(n_irs_y), int(n_irs_z)
        if min(n_ap, n_irs_y, n_irs_z) < 1:
            raise ValueError("array dimensions must be >= 1")
        if element_spacing <= 0:
            raise ValueError("element_spacing must be positive")
        return super(ArraySpec, cls).__new__(cls, n_ap, n_irs_y, n_irs_z,
                                             float(element_spacing))

    @property
    def n_irs(self):
        return self.n_irs_y*self.n_irs_z


class FadingSpec(namedtuple('FadingSpec', ['kappa_g', 'kappa_i',
                                           'pathloss_direct',
                                           'pathloss_ap_irs',
                                           'pathloss_irs_lu'])):
    """ Rician factors (linear) and (intercept dB, slope dB/decade)
    path-loss laws for the three links. """
    __slots__ = ()

    def __new__(cls, kappa_g, kappa_i, pathloss_direct, pathloss_ap_irs,
                pathloss_irs_lu):
        for name, kappa in [('kappa_g', kappa_g), ('kappa_i', kappa_i)]:
            if not (0 <= kappa <= KAPPA_MAX):
                raise ValueError("%s must lie in [0, %g]; got %r"
                                 % (name, KAPPA_MAX, kappa))
        laws = [tuple(float(v) for v in law) for law in
                (pathloss_direct, pathloss_ap_irs, pathloss_irs_lu)]
        if any(len(law) != 2 for law in laws):
            raise ValueError("path-loss laws are (intercept, slope) pairs")
        self = super(FadingSpec, cls).__new__(cls, float(kappa_g),
                                              float(kappa_i), *laws)
        for kappa in (self.kappa_g, self.kappa_i):
            los, nlos = rician_weights(kappa)
            assert abs(los**2 + nlos**2 - 1.) < 1e-12
        return self


def rician_weights(kappa):
    """ Amplitude weights (LOS, NLOS) of a Rician mixture with factor
    `kappa`; their squares sum to one. """
    return np.sqrt(kappa/(1. + kappa)), np.sqrt(1./(1. + kappa))


class ChannelSet(namedtuple('ChannelSet', ['h_direct', 'g_ap_irs',
                                           'h_irs_lu'])):
    """ One channel realization.

    Attributes
    ----------
    h_direct : K x N_A complex array
        Row k is h_d,k^H
    g_ap_irs : N_I x N_A complex array
        The AP->IRS matrix G
    h_irs_lu : K x N_I complex array
        Row k is h_I,k^H

    """
    __slots__ = ()

    def __new__(cls, h_direct, g_ap_irs, h_irs_lu):
        arrs = []
        for a in (h_direct, g_ap_irs, h_irs_lu):
            a = np.array(a, dtype=complex)
            if a.ndim != 2:
                raise ValueError("channel matrices must be 2D")
            if not np.all(np.isfinite(a)):
                raise ValueError("channel entries must be finite")
            a.setflags(write=False)
            arrs.append(a)
        h_direct, g_ap_irs, h_irs_lu = arrs
        k, n_ap = h_direct.shape
        n_irs = g_ap_irs.shape[0]
        if g_ap_irs.shape[1] != n_ap or h_irs_lu.shape != (k, n_irs):
            raise ValueError("inconsistent channel dimensions: H_d %r, G %r,"
                             " H_I %r" % (h_direct.shape, g_ap_irs.shape,
                                          h_irs_lu.shape))
        return super(ChannelSet, cls).__new__(cls, h_direct, g_ap_irs,
                                              h_irs_lu)

    @property
    def k_users(self):
        return self.h_direct.shape[0]

    @property
    def n_ap(self):
        return self.h_direct.shape[1]

    @property
    def n_irs(self):
        return self.g_ap_irs.shape[0]

    def without_irs(self):
        """ Copy of this realization with the IRS->LU link removed. """
        return self._replace(h_irs_lu=np.zeros_like(self.h_irs_lu))

    def irs_subarray(self, n_irs_y, n_y, n_z):
        """ The same realization restricted to the n_y x n_z corner of the
        IRS (rows m_z < n_z, columns m_y < n_y).

        Parameters
        ----------
        n_irs_y : int
            Full IRS width along y, used to unflatten the element index
        n_y, n_z : int
            Sub-array dimensions; clipped to the full array

        """
        n_irs_z, rem = divmod(self.n_irs, n_irs_y)
        if n_irs_y < 1 or rem:
            raise ValueError("%d IRS elements do not form rows of %d"
                             % (self.n_irs, n_irs_y))
        n_y, n_z = min(int(n_y), n_irs_y), min(int(n_z), n_irs_z)
        if min(n_y, n_z) < 1:
            raise ValueError("sub-array dimensions must be >= 1")
        idx = (np.arange(n_z)[:, None]*n_irs_y
               + np.arange(n_y)[None, :]).ravel()
        return ChannelSet(self.h_direct, self.g_ap_irs[idx],
                          self.h_irs_lu[:, idx])

    def digest(self):
        """ SHA-1 hex digest of the realization's bytes. """
        sha = hashlib.sha1()
        for a in self:
            sha.update(np.ascontiguousarray(a).tobytes())
        return sha.hexdigest()

    def _replace(self, **kwargs):
        return ChannelSet(**dict(self._asdict(), **kwargs))


#####################################################################
## LARGE-SCALE LOSS AND ARRAY RESPONSES

def path_loss_db(model, distance):
    """ Log-distance path loss `intercept + slope*log10(d)` in dB.

    Parameters
    ----------
    model : (float, float)
        Intercept (dB) and slope (dB per decade)
    distance : float or array-like
        Distance(s) in meters; must be strictly positive

    """
    intercept, slope = model
    distance = np.asarray(distance, dtype=float)
    if np.any(distance <= 0):
        raise ValueError("path loss needs positive distance; got %r"
                         % (distance, ))
    return intercept + slope*np.log10(distance)

def _amplitude(model, distance):
    return np.sqrt(db_to_linear(-path_loss_db(model, distance)))

def ula_response(n, angle, spacing=0.5):
    """ Unit-modulus ULA response; element m has phase
    2*pi*spacing*m*sin(angle). """
    if n < 1:
        raise ValueError("array needs at least one element")
    m = np.arange(n)
    return np.exp(2j*np.pi*spacing*m*np.sin(angle))

def upa_response(ny, nz, azimuth, elevation, spacing=0.5):
    """ Unit-modulus UPA response for an array in the y-z plane.

    Element (m_y, m_z) has phase
    2*pi*spacing*(m_y*sin(elevation)*sin(azimuth) + m_z*cos(elevation)),
    with elevation measured from the z-axis. The result is flattened
    z-major, i.e. entry m_z*ny + m_y.

    """
    if ny < 1 or nz < 1:
        raise ValueError("array needs at least one element per axis")
    a_y = np.exp(2j*np.pi*spacing*np.arange(ny)
                 * np.sin(elevation)*np.sin(azimuth))
    a_z = np.exp(2j*np.pi*spacing*np.arange(nz)*np.cos(elevation))
    return np.kron(a_z, a_y)

def _ray_angles(origin, target):
    """ (azimuth, elevation, y direction cosine) of the ray origin->target;
    elevation is the polar angle from the z-axis. """
    v = np.asarray(target, dtype=float) - np.asarray(origin, dtype=float)
    dist = np.linalg.norm(v)
    azimuth = np.arctan2(v[1], v[0])
    elevation = np.arccos(np.clip(v[2]/dist, -1., 1.))
    return azimuth, elevation, v[1]/dist

#####################################################################
## SAMPLING

def sample_geometry(rng, ap_position, irs_position, cluster_center,
                    cluster_radius, k_users):
    """ Place `k_users` LUs uniformly over the horizontal disk of radius
    `cluster_radius` around `cluster_center` (z taken from the center). """
    center = _as_point(cluster_center)
    radius = cluster_radius*np.sqrt(rng.uniform(0., 1., k_users))
    theta = rng.uniform(0., 2.*np.pi, k_users)
    lus = np.column_stack([center[0] + radius*np.cos(theta),
                           center[1] + radius*np.sin(theta),
                           np.full(k_users, center[2])])
    return Geometry(ap_position, irs_position, lus, center, cluster_radius)

def sample_channels(rng, geometry, arrays, fading):
    """ Draw one ChannelSet for the given placement.

    Random draws are consumed in a fixed order (direct channels, G NLOS,
    IRS->LU NLOS), so a Generator in a given state always yields the
    same realization.

    Parameters
    ----------
    rng : numpy.random.Generator
        Source of the small-scale fading
    geometry : Geometry
    arrays : ArraySpec
    fading : FadingSpec

    Returns
    -------
    ChannelSet

    """
    k = geometry.k_users
    n_ap, n_irs = arrays.n_ap, arrays.n_irs
    spacing = arrays.element_spacing

    # Direct links - Rayleigh
    amp_d = _amplitude(fading.pathloss_direct, geometry.d_direct)
    h_direct = amp_d[:, None]*complex_normal(rng, (k, n_ap))

    # AP -> IRS. LOS = sqrt(N_I N_A) alpha_I alpha_A^H with unit-norm
    # responses, so ||G_LOS||_F^2 = N_I N_A.
    _, _, cos_y_ap = _ray_angles(geometry.ap_position, geometry.irs_position)
    az, el, _ = _ray_angles(geometry.irs_position, geometry.ap_position)
    alpha_a = ula_response(n_ap, np.arcsin(cos_y_ap), spacing)/np.sqrt(n_ap)
    alpha_i = upa_response(arrays.n_irs_y, arrays.n_irs_z, az, el,
                           spacing)/np.sqrt(n_irs)
    g_los = np.sqrt(n_irs*n_ap)*np.outer(alpha_i, alpha_a.conj())
    los_w, nlos_w = rician_weights(fading.kappa_g)
    g_ap_irs = _amplitude(fading.pathloss_ap_irs, geometry.d_ap_irs)*(
        los_w*g_los + nlos_w*complex_normal(rng, (n_irs, n_ap))
    )

    # IRS -> LUs; rows hold h_I,k^H
    h_los = np.empty((k, n_irs), dtype=complex)
    for i, lu in enumerate(geometry.lu_positions):
        az, el, _ = _ray_angles(geometry.irs_position, lu)
        h_los[i] = upa_response(arrays.n_irs_y, arrays.n_irs_z, az, el,
                                spacing)
    los_w, nlos_w = rician_weights(fading.kappa_i)
    amp_i = _amplitude(fading.pathloss_irs_lu, geometry.d_irs_lu)
    h_irs = amp_i[:, None]*(los_w*h_los
                            + nlos_w*complex_normal(rng, (k, n_irs)))

    return ChannelSet(h_direct, g_ap_irs, h_irs.conj())

def assemble_combined(channels, phi):
    """ Combined channel rows h_I,k^H diag(phi) G + h_d,k^H.

    Parameters
    ----------
    channels : ChannelSet
    phi : ReflectVector or array-like
        Length-N_I reflection coefficients

    Returns
    -------
    K x N_A complex array

    """
    phi = np.asarray(getattr(phi, 'entries', phi))
    if phi.shape != (channels.n_irs, ):
        raise ValueError("reflect vector has shape %r; IRS has %d elements"
                         % (phi.shape, channels.n_irs))
    return (channels.h_irs_lu*phi[None, :]) @ channels.g_ap_irs \
        + channels.h_direct
