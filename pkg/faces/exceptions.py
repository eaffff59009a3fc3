class HalffaceError(Exception):
    """Базовая ошибка библиотеки halfface"""


# Изображения

class ImageNotFoundError(HalffaceError, FileNotFoundError):
    pass


class UnsupportedImageFormatError(HalffaceError):
    pass


class CorruptImageError(HalffaceError):
    pass


class ImageWriteError(HalffaceError, OSError):
    pass


class RectOutOfBoundsError(HalffaceError):
    pass


class DimensionMismatchError(HalffaceError):
    pass


# Поиск оси симметрии

class CascadeFormatError(HalffaceError):
    pass


class DetectionError(HalffaceError):
    pass


class DegenerateBandError(HalffaceError):
    pass


# Корреляция и сшивка

class UndefinedCorrelationError(HalffaceError):
    """Нулевая дисперсия в одном из операндов: корреляция не определена"""


class StitchGeometryError(HalffaceError):
    pass


# Eigenfaces

class GeometryMismatchError(HalffaceError):
    pass


class EigensolverError(HalffaceError):
    pass


class ModelFormatError(HalffaceError):
    pass


class ModelVersionError(ModelFormatError):
    pass


class CorruptModelError(ModelFormatError):
    pass


class ModelInvariantError(ModelFormatError):
    pass


# Корпус и эксперименты

class CorpusError(HalffaceError):
    pass


class EmptyCorpusError(CorpusError):
    pass


class SplitInfeasibleError(CorpusError):
    pass
