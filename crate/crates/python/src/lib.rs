//! Python bindings: frames, the encoder and decoder, metrics, and the rate
//! arithmetic of the bench harness.

#[pyo3::pymodule]
mod spectral_pq_py {
    use pyo3::exceptions::{PyIOError, PyValueError};
    use pyo3::prelude::*;
    use pyo3::types::PyBytes;

    use spectral_pq::bench::{self, Synthetic};
    use spectral_pq::frame::{self, Plane};
    use spectral_pq::metrics;
    use spectral_pq::pipeline::{self, Mode};
    use spectral_pq::quantizer;
    use spectral_pq::Error;

    fn py_err(e: Error) -> PyErr {
        match e {
            Error::Io(e) => PyIOError::new_err(e.to_string()),
            other => PyValueError::new_err(other.to_string()),
        }
    }

    /// One picture of planar G, B, R samples.
    #[pyclass(name = "Frame", from_py_object)]
    #[derive(Clone)]
    pub struct PyFrame {
        inner: frame::Frame,
    }

    #[pymethods]
    impl PyFrame {
        /// Builds a frame from row-major G, B and R sample lists.
        #[new]
        fn new(
            width: usize,
            height: usize,
            bit_depth: u32,
            g: Vec<u16>,
            b: Vec<u16>,
            r: Vec<u16>,
        ) -> PyResult<Self> {
            let planes = [g, b, r].map(|d| Plane::from_vec(width, height, d));
            let [g, b, r] = planes;
            let inner = frame::Frame::from_planes(
                [g.map_err(py_err)?, b.map_err(py_err)?, r.map_err(py_err)?],
                bit_depth,
            )
            .map_err(py_err)?;
            Ok(PyFrame { inner })
        }

        #[getter]
        fn width(&self) -> usize {
            self.inner.width
        }

        #[getter]
        fn height(&self) -> usize {
            self.inner.height
        }

        #[getter]
        fn bit_depth(&self) -> u32 {
            self.inner.bit_depth
        }

        /// Samples of channel 0 (G), 1 (B) or 2 (R).
        fn plane(&self, channel: usize) -> PyResult<Vec<u16>> {
            self.inner
                .planes
                .get(channel)
                .map(|p| p.data.clone())
                .ok_or_else(|| PyValueError::new_err(format!("channel {channel} out of range")))
        }

        fn __eq__(&self, other: &Self) -> bool {
            self.inner == other.inner
        }

        fn __repr__(&self) -> String {
            format!(
                "Frame({}x{}, {}-bit)",
                self.inner.width, self.inner.height, self.inner.bit_depth
            )
        }
    }

    fn unwrap_frames(frames: &[PyFrame]) -> Vec<frame::Frame> {
        frames.iter().map(|f| f.inner.clone()).collect()
    }

    fn wrap_frames(frames: Vec<frame::Frame>) -> Vec<PyFrame> {
        frames.into_iter().map(|inner| PyFrame { inner }).collect()
    }

    /// Parses raw planar sequence bytes.
    #[pyfunction]
    #[pyo3(signature = (data, width, height, bit_depth, frame_count=None))]
    fn parse_sequence(
        data: &[u8],
        width: usize,
        height: usize,
        bit_depth: u32,
        frame_count: Option<usize>,
    ) -> PyResult<Vec<PyFrame>> {
        let per = frame::frame_bytes(width, height, bit_depth);
        let count = frame_count.unwrap_or(data.len().checked_div(per).unwrap_or(0));
        frame::parse_sequence(data, width, height, bit_depth, count)
            .map(wrap_frames)
            .map_err(py_err)
    }

    #[pyfunction]
    fn serialize_sequence<'py>(py: Python<'py>, frames: Vec<PyFrame>) -> Bound<'py, PyBytes> {
        PyBytes::new(py, &frame::serialize_sequence(&unwrap_frames(&frames)))
    }

    #[pyfunction]
    #[pyo3(signature = (kind, width=64, height=64, frames=30, bit_depth=8, seed=1))]
    fn synthetic_sequence(
        kind: &str,
        width: usize,
        height: usize,
        frames: usize,
        bit_depth: u32,
        seed: u64,
    ) -> PyResult<Vec<PyFrame>> {
        let k = Synthetic::ALL
            .into_iter()
            .find(|k| k.name() == kind)
            .ok_or_else(|| PyValueError::new_err(format!("unknown sequence kind '{kind}'")))?;
        bench::synthetic_sequence(k, width, height, frames, bit_depth, seed)
            .map(wrap_frames)
            .map_err(py_err)
    }

    #[pyclass(name = "EncoderConfig", from_py_object)]
    #[derive(Clone)]
    pub struct PyEncoderConfig {
        inner: pipeline::EncoderConfig,
    }

    #[pymethods]
    impl PyEncoderConfig {
        #[new]
        #[pyo3(signature = (qp=27, mode="spectral-pq", rdoq=true, gop=30, ctu_size=64, cu_size=32, search_range=16, fps=30.0))]
        #[allow(clippy::too_many_arguments)]
        fn new(
            qp: i32,
            mode: &str,
            rdoq: bool,
            gop: usize,
            ctu_size: usize,
            cu_size: usize,
            search_range: i32,
            fps: f64,
        ) -> PyResult<Self> {
            let inner = pipeline::EncoderConfig {
                base_qp: qp,
                mode: mode.parse::<Mode>().map_err(py_err)?,
                rdoq,
                gop,
                ctu_size,
                cu_size,
                search_range,
                fps,
                ..Default::default()
            };
            inner.validate().map_err(py_err)?;
            Ok(PyEncoderConfig { inner })
        }

        #[getter]
        fn qp(&self) -> i32 {
            self.inner.base_qp
        }

        #[getter]
        fn mode(&self) -> &'static str {
            self.inner.mode.as_str()
        }

        fn __repr__(&self) -> String {
            format!("{:?}", self.inner)
        }
    }

    /// Result of encoding a sequence.
    #[pyclass(name = "EncodeResult")]
    pub struct PyEncodeResult {
        inner: pipeline::EncodeOutput,
    }

    #[pymethods]
    impl PyEncodeResult {
        #[getter]
        fn bitstream<'py>(&self, py: Python<'py>) -> Bound<'py, PyBytes> {
            PyBytes::new(py, &self.inner.bitstream)
        }

        #[getter]
        fn total_bits(&self) -> usize {
            self.inner.total_bits()
        }

        /// Residual bits per channel, G, B, R.
        #[getter]
        fn channel_bits(&self) -> [usize; 3] {
            self.inner.channel_bits()
        }

        #[getter]
        fn recon(&self) -> Vec<PyFrame> {
            wrap_frames(self.inner.recon.clone())
        }

        /// Coded QPs: one list per frame of `[g, b, r]` per CU.
        #[getter]
        fn qps(&self) -> Vec<Vec<[i32; 3]>> {
            self.inner.frames.iter().map(|f| f.qps.clone()).collect()
        }
    }

    #[pyfunction]
    fn encode(
        py: Python<'_>,
        frames: Vec<PyFrame>,
        config: PyEncoderConfig,
    ) -> PyResult<PyEncodeResult> {
        let frames = unwrap_frames(&frames);
        py.detach(|| pipeline::encode_sequence(&frames, &config.inner))
            .map(|inner| PyEncodeResult { inner })
            .map_err(py_err)
    }

    #[pyfunction]
    fn decode(py: Python<'_>, bitstream: &[u8]) -> PyResult<Vec<PyFrame>> {
        let bytes = bitstream.to_vec();
        py.detach(|| pipeline::decode_sequence(&bytes))
            .map(wrap_frames)
            .map_err(py_err)
    }

    /// Per-channel PSNR and SSIM over a sequence, as a dict.
    #[pyfunction]
    fn quality(
        reference: Vec<PyFrame>,
        recon: Vec<PyFrame>,
    ) -> PyResult<std::collections::HashMap<String, Vec<f64>>> {
        let q = metrics::sequence_quality(&unwrap_frames(&reference), &unwrap_frames(&recon))
            .map_err(py_err)?;
        Ok([
            ("psnr".to_string(), q.psnr.to_vec()),
            ("ssim".to_string(), q.ssim.to_vec()),
            ("ssim_rgb".to_string(), vec![q.ssim_mean]),
        ]
        .into_iter()
        .collect())
    }

    /// `(qstep, m, s)` for a QP.
    #[pyfunction]
    fn quant_params(qp: i32) -> PyResult<(f64, i64, i64)> {
        let p = quantizer::quant_params(qp, 4).map_err(py_err)?;
        Ok((p.qstep, p.m, p.s))
    }

    #[pyfunction]
    fn kbps(total_bits: u64, frame_count: usize, fps: f64) -> PyResult<f64> {
        bench::kbps(total_bits, frame_count, fps).map_err(py_err)
    }

    #[pyfunction]
    fn bitrate_reduction(test_kbps: f64, ref_kbps: f64) -> PyResult<f64> {
        bench::bitrate_reduction(test_kbps, ref_kbps).map_err(py_err)
    }
}
