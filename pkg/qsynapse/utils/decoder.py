import json


class ConfigDecoder(json.JSONDecoder):
    def __init__(self, **kwargs):
        """JSON decoder for experiment documents.
        Arrays decode to tuples and repeated keys inside one object are rejected.
        """
        kwargs.setdefault('object_pairs_hook', self._unique_keys)
        json.JSONDecoder.__init__(self, **kwargs)
        self.parse_array = self.JSONArray
        # the python scanner picks up the overridden parse_array
        self.scan_once = json.scanner.py_make_scanner(self)

    def JSONArray(self, s_and_end, scan_once, **kwargs):
        values, end = json.decoder.JSONArray(s_and_end, scan_once, **kwargs)
        return tuple(values), end

    @staticmethod
    def _unique_keys(pairs):
        obj = {}
        for key, value in pairs:
            if key in obj:
                raise ValueError(f'Duplicate key: {key!r}')
            obj[key] = value
        return obj
