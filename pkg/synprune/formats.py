"""
Text formats for networks, structural event logs and metric traces.

NETWORK FILES
=============

    A network file starts with a comment line and the layer widths, then
    holds one section per layer pair::

        # synprune network
        layer_widths 27 16 8 1
        pair 0 27 16
        weights
        <27 rows of 16 values, row-major, full precision>
        biases
        <16 values>
        mask
        <27 rows of 16 characters, '1' enabled, '0' disabled>
        end

    Values are written with ``repr`` so they read back bit for bit.

EVENT LOGS
==========

    One tab separated line per structural event::

        epoch   kind   sparsity_after   k:i:j k:i:j ...

    A '-' stands for an event without connections.

"""

import numpy as np
import pandas as pd

from synprune.compression import StructuralEvent
from synprune.metrics import TRACE_COLUMNS
from synprune.network import Architecture, ConnectionMask, MaskedNetwork

NETWORK_MAGIC = '# synprune network'
EVENTS_HEADER = '# epoch\tkind\tsparsity_after\tconnections'


def _row(values):
    return ' '.join(repr(float(v)) for v in values)


def format_network(net):
    lines = [NETWORK_MAGIC,
             'layer_widths ' + ' '.join(
                 str(w) for w in net.architecture.layer_widths)]
    for k, (w, b, m) in enumerate(zip(net.weights, net.biases,
                                      net.mask.layers)):
        lines.append('pair %d %d %d' % (k, w.shape[0], w.shape[1]))
        lines.append('weights')
        lines.extend(_row(r) for r in w)
        lines.append('biases')
        lines.append(_row(b))
        lines.append('mask')
        lines.extend(''.join('1' if e else '0' for e in r) for r in m)
        lines.append('end')
    return '\n'.join(lines) + '\n'


def write_network(net, filename):
    """Write `net` to `filename` in the network text format."""
    with open(filename, 'w') as f:
        f.write(format_network(net))


class _Lines(object):
    """Line cursor that names the file and line number in its errors."""

    def __init__(self, text, source):
        self.lines = text.splitlines()
        self.source = source
        self.pos = 0

    def error(self, message):
        return ValueError("{} (line {}): {}".format(
            self.source, self.pos, message))

    def next(self, expect=None):
        if self.pos >= len(self.lines):
            raise self.error("unexpected end of file")
        line = self.lines[self.pos].strip()
        self.pos += 1
        if expect is not None and line != expect:
            raise self.error("expected '{}', got '{}'".format(expect, line))
        return line

    def floats(self, n):
        try:
            values = [float(v) for v in self.next().split()]
        except ValueError as e:
            raise self.error(str(e))
        if len(values) != n:
            raise self.error("expected {} values, got {}".format(
                n, len(values)))
        return values


def parse_network(text, source='<string>'):
    """Inverse of `format_network`."""
    cursor = _Lines(text, source)
    cursor.next(NETWORK_MAGIC)
    head = cursor.next().split()
    if not head or head[0] != 'layer_widths':
        raise cursor.error("expected the layer_widths line")
    try:
        arch = Architecture([int(w) for w in head[1:]])
    except ValueError as e:
        raise cursor.error(str(e))
    weights, biases, layers = [], [], []
    for k, (nin, nout) in enumerate(arch.shapes):
        cursor.next('pair %d %d %d' % (k, nin, nout))
        cursor.next('weights')
        weights.append(np.array([cursor.floats(nout) for _ in range(nin)]))
        cursor.next('biases')
        biases.append(np.array(cursor.floats(nout)))
        cursor.next('mask')
        rows = []
        for _ in range(nin):
            row = cursor.next()
            if len(row) != nout or set(row) - set('01'):
                raise cursor.error("bad mask row '{}'".format(row))
            rows.append([c == '1' for c in row])
        layers.append(np.array(rows, dtype=bool).reshape(nin, nout))
        cursor.next('end')
    return MaskedNetwork(arch, weights, biases, ConnectionMask(layers))


def read_network(filename):
    """Read a network file written by `write_network`."""
    try:
        with open(filename) as f:
            text = f.read()
    except (IOError, OSError):
        raise IOError("Could not open file: %s" % filename)
    return parse_network(text, filename)


def format_event(event):
    conns = ' '.join('%d:%d:%d' % c for c in event.connections) or '-'
    return '%d\t%s\t%r\t%s' % (event.epoch, event.kind,
                               event.sparsity_after, conns)


def parse_event(line):
    try:
        epoch, kind, sparsity, conns = line.rstrip('\n').split('\t')
        connections = [] if conns == '-' else [
            tuple(int(v) for v in c.split(':')) for c in conns.split()]
        return StructuralEvent(int(epoch), kind, connections, float(sparsity))
    except ValueError as e:
        raise ValueError("bad event line {!r}: {}".format(line, e))


def write_events(events, filename):
    with open(filename, 'w') as f:
        f.write(EVENTS_HEADER + '\n')
        for event in events:
            f.write(format_event(event) + '\n')


def read_events(filename):
    events = []
    with open(filename) as f:
        for line in f:
            if line.startswith('#') or not line.strip():
                continue
            events.append(parse_event(line))
    return events


def write_trace(trace, filename):
    """Write a MetricTrace as `epoch,train_loss,val_accuracy,val_auc,sparsity`."""
    trace[TRACE_COLUMNS].to_csv(filename, index=False,
                                float_format='%.17g')


def read_trace(filename):
    trace = pd.read_csv(filename, float_precision='round_trip')
    if list(trace.columns) != TRACE_COLUMNS:
        raise ValueError("{}: unexpected trace columns {}".format(
            filename, list(trace.columns)))
    return trace
